#pragma once

// Causal discovery in multivariate time series: rank-based Differentiable
// Information Imbalance with learned variable weights, the Imbalance Gain
// causal score, and a classical VAR/Granger baseline, sharing one data model.

#include "causaldii/errors.hpp"
#include "causaldii/rng.hpp"
#include "causaldii/panel.hpp"
#include "causaldii/ols.hpp"
#include "causaldii/stats.hpp"
#include "causaldii/neighbors.hpp"
#include "causaldii/dii.hpp"
#include "causaldii/imbalance_gain.hpp"
#include "causaldii/var.hpp"
#include "causaldii/synthetic.hpp"
#include "causaldii/parallel.hpp"
#include "causaldii/report.hpp"
