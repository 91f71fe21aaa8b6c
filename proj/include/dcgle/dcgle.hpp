#pragma once

#include "dcgle/config.hpp"
#include "dcgle/csv.hpp"
#include "dcgle/error.hpp"
#include "dcgle/existence.hpp"
#include "dcgle/model.hpp"
#include "dcgle/parallel.hpp"
#include "dcgle/params.hpp"
#include "dcgle/plot.hpp"
#include "dcgle/roots.hpp"
#include "dcgle/scenarios.hpp"
#include "dcgle/sim.hpp"
#include "dcgle/stability.hpp"
#include "dcgle/trivial_state.hpp"
