/*
 * Copyright 2026 The VeriGauge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

namespace verigauge {

/// Toolkit entry point: subcommands audit, simulate, partition, thresholds,
/// plot. Returns 0 on success, 1 on validation or runtime failure, 2 on
/// usage errors. Diagnostics go to stderr; data goes to files or stdout.
int cli_main(int argc, const char* const* argv);

}  // namespace verigauge
