#pragma once

#include "error.hpp"
#include "glued_trees.hpp"
#include "graph.hpp"
#include "line_dynamics.hpp"
#include "line_spectral.hpp"
#include "momentum.hpp"
#include "propagator.hpp"
#include "scattering.hpp"
#include "tree_column.hpp"

namespace snakewalk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace snakewalk
