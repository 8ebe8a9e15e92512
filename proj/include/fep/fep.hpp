#pragma once

#include "fep/error.hpp"
#include "fep/rng.hpp"
#include "fep/lattice.hpp"
#include "fep/mapping.hpp"
#include "fep/rates.hpp"
#include "fep/dynamics.hpp"
#include "fep/parallel.hpp"
#include "fep/pde.hpp"
#include "fep/residuals.hpp"
#include "fep/io.hpp"
#include "fep/harness.hpp"
