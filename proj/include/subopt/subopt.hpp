#pragma once

#include "subopt/chi_square.hpp"
#include "subopt/common.hpp"
#include "subopt/dataset.hpp"
#include "subopt/loss.hpp"
#include "subopt/rng.hpp"
#include "subopt/sample_draw.hpp"
#include "subopt/sampling.hpp"
#include "subopt/simulate.hpp"
#include "subopt/solver.hpp"
#include "subopt/uncertainty.hpp"
