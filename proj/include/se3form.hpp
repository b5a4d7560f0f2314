// Copyright 2026 The se3form Authors
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

#include "se3form/catalog.hpp"
#include "se3form/control.hpp"
#include "se3form/error.hpp"
#include "se3form/graph.hpp"
#include "se3form/io.hpp"
#include "se3form/lie.hpp"
#include "se3form/rigidity.hpp"
#include "se3form/scenario.hpp"
#include "se3form/simulation.hpp"
