#pragma once

namespace landau {

// Code version recorded in every artifact (diagnostics JSON, checkpoints).
// Bump on any change that can alter numerical output.
inline constexpr const char* kCodeVersion = "0.1.0";

}  // namespace landau
