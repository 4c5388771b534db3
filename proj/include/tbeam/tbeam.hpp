#pragma once

#include "tbeam/asymptotics.hpp"
#include "tbeam/charfn.hpp"
#include "tbeam/error.hpp"
#include "tbeam/grid.hpp"
#include "tbeam/modes.hpp"
#include "tbeam/params.hpp"
#include "tbeam/simulate.hpp"
#include "tbeam/spectrum.hpp"
