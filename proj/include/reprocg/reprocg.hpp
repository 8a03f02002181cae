#pragma once

// Umbrella header. The exact reference oracle (oracle.hpp) is not included
// here because it needs GMP.

#include "reprocg/csr_matrix.hpp"
#include "reprocg/eft.hpp"
#include "reprocg/errors.hpp"
#include "reprocg/fpe.hpp"
#include "reprocg/generators.hpp"
#include "reprocg/hexfloat.hpp"
#include "reprocg/long_accumulator.hpp"
#include "reprocg/matrix_market.hpp"
#include "reprocg/pcg.hpp"
#include "reprocg/repro_reduce.hpp"
