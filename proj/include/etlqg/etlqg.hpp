#pragma once

// Event-triggered LQG scheduling toolkit: Riccati gains, the exact MILP
// reformulation of the send/skip scheduling problem, one-step optimality
// certificates, and the receding-horizon scheduler with simulation and
// Monte Carlo harnesses around them.

#include "etlqg/certificates.hpp"
#include "etlqg/errors.hpp"
#include "etlqg/experiments.hpp"
#include "etlqg/kernels.hpp"
#include "etlqg/linalg.hpp"
#include "etlqg/milp.hpp"
#include "etlqg/model.hpp"
#include "etlqg/random.hpp"
#include "etlqg/riccati.hpp"
#include "etlqg/selftest.hpp"
#include "etlqg/simulate.hpp"
#include "etlqg/solver.hpp"
