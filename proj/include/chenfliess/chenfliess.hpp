#pragma once

#include "chenfliess/errors.hpp"
#include "chenfliess/path.hpp"
#include "chenfliess/multi_index.hpp"
#include "chenfliess/iterated_integrals.hpp"
#include "chenfliess/scalar_function.hpp"
#include "chenfliess/functional.hpp"
#include "chenfliess/derivations.hpp"
#include "chenfliess/sde.hpp"
#include "chenfliess/parallel.hpp"
#include "chenfliess/chen_fliess.hpp"
#include "chenfliess/bv_approx.hpp"
