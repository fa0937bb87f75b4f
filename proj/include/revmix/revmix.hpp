#pragma once

#include "errors.hpp"
#include "torus.hpp"
#include "model.hpp"
#include "rk.hpp"
#include "flow.hpp"
#include "poincare.hpp"
#include "orbit_finder.hpp"
#include "manifold.hpp"
#include "attractor_repeller.hpp"
#include "chain_recurrence.hpp"
#include "normal_form.hpp"
#include "io.hpp"
