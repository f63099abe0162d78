#pragma once

#include "analysis.hpp"
#include "config.hpp"
#include "expr.hpp"
#include "ideal.hpp"
#include "index_set.hpp"
#include "rational.hpp"
#include "report.hpp"
#include "sequence.hpp"
#include "space.hpp"
#include "verdict.hpp"
