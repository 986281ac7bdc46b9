#pragma once

#include "iup/bench.hpp"
#include "iup/errors.hpp"
#include "iup/fringe_analysis.hpp"
#include "iup/image.hpp"
#include "iup/interferometer.hpp"
#include "iup/keyvalue.hpp"
#include "iup/map_io.hpp"
#include "iup/qpm.hpp"
#include "iup/stack_io.hpp"
#include "iup/targets.hpp"
