#pragma once

#include "vlab/complex_calculus.hpp"
#include "vlab/config.hpp"
#include "vlab/domain.hpp"
#include "vlab/equivalence.hpp"
#include "vlab/errors.hpp"
#include "vlab/experiments.hpp"
#include "vlab/first_order.hpp"
#include "vlab/flow.hpp"
#include "vlab/inverse_lab.hpp"
#include "vlab/lsq.hpp"
#include "vlab/plate.hpp"
#include "vlab/report.hpp"
#include "vlab/spectral.hpp"
#include "vlab/wirtinger.hpp"
