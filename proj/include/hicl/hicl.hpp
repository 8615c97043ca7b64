#pragma once

// Umbrella header: hierarchy generation from class conditional means,
// exploitation schemes (FC / Global / LCPN / LCPN+ / LCPN+F), base
// classifiers, LDA reduction, and the cross-validation benchmark harness.

#include "cli.hpp"
#include "classifiers.hpp"
#include "config.hpp"
#include "core.hpp"
#include "dataset.hpp"
#include "eval.hpp"
#include "hierarchy.hpp"
#include "kmedoids.hpp"
#include "lda.hpp"
#include "rng.hpp"
#include "schemes.hpp"
