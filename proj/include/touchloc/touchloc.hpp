#pragma once

#include <touchloc/action.hpp>
#include <touchloc/actions.hpp>
#include <touchloc/belief.hpp>
#include <touchloc/contact_table.hpp>
#include <touchloc/geometry.hpp>
#include <touchloc/metrics.hpp>
#include <touchloc/observation.hpp>
#include <touchloc/oracle.hpp>
#include <touchloc/policy.hpp>
#include <touchloc/rng.hpp>
#include <touchloc/scene.hpp>
#include <touchloc/sensing.hpp>
