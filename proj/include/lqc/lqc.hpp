#pragma once

#include "lqc/convolution.hpp"
#include "lqc/eigensolver.hpp"
#include "lqc/errors.hpp"
#include "lqc/field_io.hpp"
#include "lqc/lattice.hpp"
#include "lqc/mediator.hpp"
#include "lqc/one_body.hpp"
#include "lqc/planner.hpp"
#include "lqc/single_particle.hpp"
#include "lqc/two_electron.hpp"
