#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "layerpatch/digest.hpp"

namespace {

std::vector<std::uint8_t> make_input(std::size_t size) {
    std::mt19937_64 rng(size);
    std::vector<std::uint8_t> data(size);
    for (std::size_t i = 0; i < size; ++i) {
        data[i] = static_cast<std::uint8_t>(rng());
    }
    return data;
}

void BM_Sha256(benchmark::State& state) {
    std::vector<std::uint8_t> input = make_input(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        layerpatch::Digest d = layerpatch::sha256(input);
        benchmark::DoNotOptimize(d);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(input.size()));
}

void BM_Sha256Streaming(benchmark::State& state) {
    std::vector<std::uint8_t> input = make_input(1 << 20);
    const std::size_t chunk = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        layerpatch::Sha256 hasher;
        for (std::size_t off = 0; off < input.size(); off += chunk) {
            std::size_t n = std::min(chunk, input.size() - off);
            hasher.update(std::span(input.data() + off, n));
        }
        layerpatch::Digest d = hasher.finish();
        benchmark::DoNotOptimize(d);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(input.size()));
}

} // namespace

BENCHMARK(BM_Sha256)->Range(1 << 10, 32 << 20);
BENCHMARK(BM_Sha256Streaming)->RangeMultiplier(8)->Range(64, 1 << 18);

BENCHMARK_MAIN();
