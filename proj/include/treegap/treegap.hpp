#pragma once

#include "treegap/error.hpp"
#include "treegap/generic.hpp"
#include "treegap/metric.hpp"
#include "treegap/negtype.hpp"
#include "treegap/oracle.hpp"
#include "treegap/pruning.hpp"
#include "treegap/simplex.hpp"
#include "treegap/tree.hpp"
#include "treegap/tree_io.hpp"
