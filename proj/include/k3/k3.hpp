#pragma once

#include "k3/errors.hpp"
#include "k3/fields.hpp"
#include "k3/linalg.hpp"
#include "k3/quadratic_spaces.hpp"
#include "k3/crystals.hpp"
#include "k3/moduli.hpp"
#include "k3/lattices.hpp"
#include "k3/formal_groups.hpp"
#include "k3/serialize.hpp"
