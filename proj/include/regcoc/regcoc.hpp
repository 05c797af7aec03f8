#pragma once

#include "regcoc/bbm.hpp"
#include "regcoc/coc.hpp"
#include "regcoc/debt.hpp"
#include "regcoc/error.hpp"
#include "regcoc/event_tree.hpp"
#include "regcoc/gross_rate.hpp"
#include "regcoc/io.hpp"
#include "regcoc/multiyear.hpp"
#include "regcoc/policy.hpp"
#include "regcoc/reproduce.hpp"
#include "regcoc/valuation.hpp"
