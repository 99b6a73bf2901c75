//! Benchmark harness for the dipole-coupler kernels; see `benches/`.
