#pragma once

#include "annotation.hpp"
#include "error.hpp"
#include "formula.hpp"
#include "frame.hpp"
#include "io.hpp"
#include "normalform.hpp"
#include "ordinal.hpp"
#include "pump.hpp"
#include "semantics.hpp"
#include "system.hpp"
