#pragma once

#include "nhfrac/errors.hpp"
#include "nhfrac/family.hpp"
#include "nhfrac/field.hpp"
#include "nhfrac/generators.hpp"
#include "nhfrac/geometry.hpp"
#include "nhfrac/harness.hpp"
#include "nhfrac/io.hpp"
#include "nhfrac/maximal.hpp"
#include "nhfrac/member_set.hpp"
#include "nhfrac/operators.hpp"
#include "nhfrac/random.hpp"
#include "nhfrac/rbmo.hpp"
#include "nhfrac/reference.hpp"
#include "nhfrac/report.hpp"
#include "nhfrac/space.hpp"
