#pragma once

#include "lenc/errors.hpp"
#include "lenc/phone_map.hpp"
#include "lenc/alignment.hpp"
#include "lenc/numerics.hpp"
#include "lenc/duration_stats.hpp"
#include "lenc/hypothesis_tests.hpp"
#include "lenc/contrast.hpp"
#include "lenc/synthgen.hpp"
#include "lenc/report.hpp"
