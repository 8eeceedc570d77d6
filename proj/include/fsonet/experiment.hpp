#pragma once

#include "fsonet/experiment/config.hpp"
#include "fsonet/experiment/csv.hpp"
#include "fsonet/experiment/runner.hpp"
