#pragma once

#include "stapcov/estimators.hpp"
#include "stapcov/evaluation.hpp"
#include "stapcov/geometry.hpp"
#include "stapcov/linalg.hpp"
#include "stapcov/rng.hpp"
#include "stapcov/simulator.hpp"
#include "stapcov/types.hpp"
