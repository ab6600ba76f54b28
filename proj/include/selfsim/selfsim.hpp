#pragma once

#include "selfsim/errors.hpp"
#include "selfsim/constitutive.hpp"
#include "selfsim/grid.hpp"
#include "selfsim/quadrature.hpp"
#include "selfsim/wave_measure.hpp"
#include "selfsim/riemann_solver.hpp"
#include "selfsim/boundary_solver.hpp"
#include "selfsim/eigen_tools.hpp"
#include "selfsim/expression.hpp"
#include "selfsim/general_system.hpp"
#include "selfsim/limit_analysis.hpp"
#include "selfsim/oracle_pde.hpp"
