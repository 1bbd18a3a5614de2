// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "vidprompt/common.hpp"
#include "vidprompt/providers.hpp"
#include "vidprompt/vocab.hpp"
#include "vidprompt/tokenizer.hpp"
#include "vidprompt/represent.hpp"
#include "vidprompt/fewshot.hpp"
#include "vidprompt/prompt.hpp"
#include "vidprompt/metrics.hpp"
#include "vidprompt/tasks.hpp"
#include "vidprompt/config.hpp"
#include "vidprompt/commands.hpp"
