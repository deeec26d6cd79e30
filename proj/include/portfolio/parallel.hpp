#pragma once

namespace portfolio {

// Kernels that have both a serial reference implementation and an
// OpenMP-parallel one take this switch.  Both paths must produce
// bit-identical results; tests assert that and the benchmark tool
// compares their wall time.
enum class ExecPolicy {
    Serial,
    Parallel,
};

} // namespace portfolio
