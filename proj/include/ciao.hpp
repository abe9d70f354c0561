// Copyright 2026 The ciao-star Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ciao/cli.hpp"
#include "ciao/conic.hpp"
#include "ciao/dynamics.hpp"
#include "ciao/errors.hpp"
#include "ciao/geometry.hpp"
#include "ciao/initializer.hpp"
#include "ciao/interior_point.hpp"
#include "ciao/io.hpp"
#include "ciao/norm.hpp"
#include "ciao/ocp.hpp"
#include "ciao/planner.hpp"
#include "ciao/sim.hpp"
#include "ciao/svg.hpp"
