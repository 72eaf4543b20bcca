#pragma once

#include "bogoliubov.hpp"
#include "config.hpp"
#include "core_model.hpp"
#include "covariance.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "fock_oracle.hpp"
#include "gge.hpp"
#include "parallel.hpp"
