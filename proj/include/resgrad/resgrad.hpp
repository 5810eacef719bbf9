#pragma once

#include "resgrad/analysis.hpp"
#include "resgrad/core.hpp"
#include "resgrad/error.hpp"
#include "resgrad/exact.hpp"
#include "resgrad/integrators.hpp"
