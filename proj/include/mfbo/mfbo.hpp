#ifndef MFBO_MFBO_HPP
#define MFBO_MFBO_HPP
#pragma once

#include "mfbo/rng.hpp"
#include "mfbo/gp_core.hpp"
#include "mfbo/mf_model.hpp"
#include "mfbo/candidate_cache.hpp"
#include "mfbo/acquisition.hpp"
#include "mfbo/explore_lf.hpp"
#include "mfbo/benchmarks.hpp"
#include "mfbo/policy.hpp"
#include "mfbo/regret.hpp"
#include "mfbo/submodular.hpp"
#include "mfbo/harness.hpp"

#endif // MFBO_MFBO_HPP
