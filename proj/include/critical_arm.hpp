#pragma once

#include "critical_arm/analysis.hpp"
#include "critical_arm/bonds.hpp"
#include "critical_arm/cluster_law.hpp"
#include "critical_arm/config.hpp"
#include "critical_arm/coupling.hpp"
#include "critical_arm/csv.hpp"
#include "critical_arm/errors.hpp"
#include "critical_arm/estimate.hpp"
#include "critical_arm/exact_current.hpp"
#include "critical_arm/exact_fk.hpp"
#include "critical_arm/exact_spin.hpp"
#include "critical_arm/inequalities.hpp"
#include "critical_arm/lattice.hpp"
#include "critical_arm/observables.hpp"
#include "critical_arm/rng.hpp"
#include "critical_arm/swendsen_wang.hpp"
#include "critical_arm/union_find.hpp"
#include "critical_arm/verify.hpp"
#include "critical_arm/worm.hpp"
