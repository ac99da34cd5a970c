#pragma once

#include "hjb/catalog.hpp"
#include "hjb/delaunay.hpp"
#include "hjb/feedback.hpp"
#include "hjb/grid_sl.hpp"
#include "hjb/io.hpp"
#include "hjb/problem.hpp"
#include "hjb/scattered_interp.hpp"
#include "hjb/spatial_hash.hpp"
#include "hjb/tree.hpp"
#include "hjb/tree_dp.hpp"
#include "hjb/types.hpp"
#include "hjb/value_iteration.hpp"
