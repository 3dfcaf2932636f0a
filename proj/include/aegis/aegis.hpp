#pragma once

// Umbrella header.

#include <aegis/config.hpp>
#include <aegis/contracts.hpp>
#include <aegis/csv.hpp>
#include <aegis/errors.hpp>
#include <aegis/losses.hpp>
#include <aegis/numerics.hpp>
#include <aegis/preferences.hpp>
#include <aegis/solver.hpp>
#include <aegis/verification.hpp>
