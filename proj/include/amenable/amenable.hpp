#pragma once

#include "amenable/error.hpp"
#include "amenable/group_geometry.hpp"
#include "amenable/l1_examples.hpp"
#include "amenable/ow_limit.hpp"
#include "amenable/quasi_tiling.hpp"
#include "amenable/random.hpp"
#include "amenable/rational.hpp"
#include "amenable/spectral_vn.hpp"
#include "amenable/widths.hpp"
