#pragma once

#include "gpiso/error.hpp"
#include "gpiso/linalg.hpp"
#include "gpiso/groups.hpp"
#include "gpiso/group_library.hpp"
#include "gpiso/bimaps.hpp"
#include "gpiso/filters.hpp"
#include "gpiso/hypergraph.hpp"
#include "gpiso/iso_search.hpp"
#include "gpiso/pseudo_isometry.hpp"
#include "gpiso/random_model.hpp"
#include "gpiso/worked_example.hpp"
