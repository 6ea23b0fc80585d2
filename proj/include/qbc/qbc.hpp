// Copyright 2026 The qbc-lab Authors
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

#include "qbc/analysis.hpp"
#include "qbc/evidence.hpp"
#include "qbc/harness.hpp"
#include "qbc/protocol_common.hpp"
#include "qbc/protocol_p1.hpp"
#include "qbc/protocol_p2p3.hpp"
#include "qbc/qcore.hpp"
#include "qbc/qubit_pool.hpp"
#include "qbc/rng.hpp"
#include "qbc/steering.hpp"
