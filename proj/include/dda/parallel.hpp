// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace dda {

/// Caps the OpenMP worker pool. n <= 0 leaves the runtime default.
void set_thread_count(int n);
int thread_count();

/// Reads DDA_THREADS; returns 0 when unset or unparsable.
int thread_count_from_env();

} // namespace dda
