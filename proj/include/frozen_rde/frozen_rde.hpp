#ifndef FROZEN_RDE_FROZEN_RDE_HPP
#define FROZEN_RDE_FROZEN_RDE_HPP

#include "bivariate.hpp"
#include "coupling.hpp"
#include "endogeny.hpp"
#include "ext_time.hpp"
#include "mbbt.hpp"
#include "node_maps.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "rtp_tree.hpp"
#include "scalefix.hpp"
#include "skeletal.hpp"
#include "stats.hpp"
#include "univariate.hpp"

#endif // FROZEN_RDE_FROZEN_RDE_HPP
