#pragma once

#include "relqm/errors.hpp"
#include "relqm/grid.hpp"
#include "relqm/numerics.hpp"
#include "relqm/geometry.hpp"
#include "relqm/em.hpp"
#include "relqm/phase_space.hpp"
#include "relqm/field_solver.hpp"
#include "relqm/madelung.hpp"
#include "relqm/gravity.hpp"
