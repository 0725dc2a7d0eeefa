// Copyright 2026 The irsaj Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "irsaj/agents.hpp"
#include "irsaj/channel.hpp"
#include "irsaj/checkpoint.hpp"
#include "irsaj/common.hpp"
#include "irsaj/config.hpp"
#include "irsaj/discretization.hpp"
#include "irsaj/environment.hpp"
#include "irsaj/harness.hpp"
#include "irsaj/jammer.hpp"
#include "irsaj/tabular.hpp"
