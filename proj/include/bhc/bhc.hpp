#pragma once
// Umbrella header.

#include "bhc/adams.hpp"
#include "bhc/errors.hpp"
#include "bhc/fft.hpp"
#include "bhc/functional.hpp"
#include "bhc/grid.hpp"
#include "bhc/nonlinearity.hpp"
#include "bhc/random_fields.hpp"
#include "bhc/riesz.hpp"
#include "bhc/snapshot.hpp"
#include "bhc/solver.hpp"
#include "bhc/verify.hpp"
