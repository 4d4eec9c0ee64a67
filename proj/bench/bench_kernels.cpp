// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference vs OpenMP kernels on feature-map sized inputs.

#include <benchmark/benchmark.h>

#include <vector>

#include "panfuse/kernels.hpp"
#include "panfuse/rng.hpp"

namespace {

using namespace panfuse::kernels;

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  panfuse::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

template <bool Parallel>
void BM_Add(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_values(n, 1);
  const auto b = random_values(n, 2);
  std::vector<double> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) omp::add(a, b, out); else serial::add(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <bool Parallel>
void BM_Sigmoid(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_values(n, 3);
  std::vector<double> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) omp::sigmoid(a, out); else serial::sigmoid(a, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

// 64 channels on a square plane of side range(0).
template <bool Parallel>
void BM_Conv1x1(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const PlaneLayout layout{64, side * side};
  const auto x = random_values(layout.channels * layout.plane, 4);
  const auto w = random_values(64 * 64, 5);
  const auto b = random_values(64, 6);
  std::vector<double> out(x.size());
  for (auto _ : state) {
    if constexpr (Parallel) omp::conv1x1(x, layout, w, b, out, layout);
    else serial::conv1x1(x, layout, w, b, out, layout);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_Conv1x1GradParams(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const PlaneLayout layout{64, side * side};
  const auto x = random_values(layout.channels * layout.plane, 7);
  const auto g = random_values(layout.channels * layout.plane, 8);
  std::vector<double> gw(64 * 64), gb(64);
  for (auto _ : state) {
    if constexpr (Parallel) omp::conv1x1_grad_params(g, layout, x, layout, gw, gb);
    else serial::conv1x1_grad_params(g, layout, x, layout, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
}

// 32-dim embeddings, 16 centers of class 2, every pixel of class 2.
template <bool Parallel>
void BM_NearestCenter(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const PlaneLayout layout{32, side * side};
  const auto emb = random_values(layout.channels * layout.plane, 9);
  const std::vector<std::int32_t> classes(layout.plane, 2);
  const auto center_emb = random_values(16 * 32, 10);
  std::vector<CenterRef> centers;
  for (std::size_t k = 0; k < 16; ++k) centers.push_back({2, std::span<const double>(center_emb).subspan(k * 32, 32)});
  std::vector<std::int32_t> assignment(layout.plane);
  for (auto _ : state) {
    if constexpr (Parallel) omp::nearest_center(classes, emb, layout, centers, 10.0, assignment);
    else serial::nearest_center(classes, emb, layout, centers, 10.0, assignment);
    benchmark::DoNotOptimize(assignment.data());
  }
}

}  // namespace

BENCHMARK(BM_Add<false>)->Name("add/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Add<true>)->Name("add/omp")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Sigmoid<false>)->Name("sigmoid/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Sigmoid<true>)->Name("sigmoid/omp")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Conv1x1<false>)->Name("conv1x1/serial")->Arg(64)->Arg(128);
BENCHMARK(BM_Conv1x1<true>)->Name("conv1x1/omp")->Arg(64)->Arg(128);
BENCHMARK(BM_Conv1x1GradParams<false>)->Name("conv1x1_grad_params/serial")->Arg(64)->Arg(128);
BENCHMARK(BM_Conv1x1GradParams<true>)->Name("conv1x1_grad_params/omp")->Arg(64)->Arg(128);
BENCHMARK(BM_NearestCenter<false>)->Name("nearest_center/serial")->Arg(64)->Arg(128);
BENCHMARK(BM_NearestCenter<true>)->Name("nearest_center/omp")->Arg(64)->Arg(128);

BENCHMARK_MAIN();
