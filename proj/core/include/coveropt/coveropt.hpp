#pragma once

#include "coveropt/coverage.hpp"
#include "coveropt/csv.hpp"
#include "coveropt/dataset.hpp"
#include "coveropt/geo.hpp"
#include "coveropt/io.hpp"
#include "coveropt/optimize.hpp"
#include "coveropt/parallel.hpp"
#include "coveropt/random.hpp"
#include "coveropt/report.hpp"
#include "coveropt/synth.hpp"
