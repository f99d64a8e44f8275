// Copyright 2026 The qfidkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qfidkit/errors.hpp"
#include "qfidkit/linalg.hpp"
#include "qfidkit/random.hpp"
#include "qfidkit/channels.hpp"
#include "qfidkit/serialization.hpp"
#include "qfidkit/checks.hpp"
#include "qfidkit/fidelity.hpp"
#include "qfidkit/entropy.hpp"
#include "qfidkit/sources.hpp"
#include "qfidkit/procedures.hpp"
#include "qfidkit/capacity.hpp"
#include "qfidkit/commands.hpp"
