#pragma once

#include "errors.hpp"
#include "scalar.hpp"
#include "laurent.hpp"
#include "seriesxz.hpp"
#include "vec.hpp"
#include "window.hpp"
#include "ratexpr.hpp"
#include "expr.hpp"
#include "report.hpp"
#include "jsonio.hpp"
#include "associates.hpp"
#include "fockrep.hpp"
#include "eops.hpp"
#include "phical/suite.hpp"
