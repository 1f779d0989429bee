#pragma once

#include "dpoi/hypergraph.hpp"
#include "dpoi/isomorphism.hpp"
#include "dpoi/matching.hpp"
#include "dpoi/category.hpp"
#include "dpoi/ma.hpp"
#include "dpoi/rewriting.hpp"
#include "dpoi/critical_pairs.hpp"
#include "dpoi/convex.hpp"
#include "dpoi/path_extensions.hpp"
#include "dpoi/terms.hpp"
#include "dpoi/rule_file.hpp"
#include "dpoi/report.hpp"
