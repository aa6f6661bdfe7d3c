#include <benchmark/benchmark.h>

#include "regext/corpus.hpp"
#include "regext/extension.hpp"
#include "regext/functionals.hpp"

using namespace regext;

namespace {

const CorpusSet& corpus(const char* name) {
  static const auto sets = default_corpus();
  for (const auto& s : sets)
    if (s.name == name) return s;
  throw Error("no corpus set");
}

RegularSet set_at(const char* name, int cells) {
  const auto& c = corpus(name);
  return generate_set(c.spec, corpus_grid(c, cells));
}

GridFunction sine(const Grid& g) {
  FunctionSpec f;
  f.kind = FunctionKind::sine;
  f.lambda = 4.0;
  return make_function(f, g);
}

void BM_Rasterize(benchmark::State& st) {
  const auto& c = corpus("lipschitz");
  const Grid g = corpus_grid(c, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(generate_set(c.spec, g));
}
BENCHMARK(BM_Rasterize)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Whitney(benchmark::State& st) {
  const auto s = set_at("fat_carpet", static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(whitney_decompose(s));
}
BENCHMARK(BM_Whitney)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_BuildOperator(benchmark::State& st) {
  const auto s = set_at("lipschitz", 128);
  const int k = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(ExtensionOperator(s, k));
}
BENCHMARK(BM_BuildOperator)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Extend(benchmark::State& st) {
  const auto s = set_at("lipschitz", static_cast<int>(st.range(0)));
  const ExtensionOperator op(s, 2);
  const GridFunction f = sine(s.grid());
  for (auto _ : st) benchmark::DoNotOptimize(extend(f, op));
}
BENCHMARK(BM_Extend)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Extend1D(benchmark::State& st) {
  const auto s = set_at("fat_cantor", 4096);
  const ExtensionOperator op(s, static_cast<int>(st.range(0)));
  const GridFunction f = sine(s.grid());
  for (auto _ : st) benchmark::DoNotOptimize(extend(f, op));
}
BENCHMARK(BM_Extend1D)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_LocalApproxField(benchmark::State& st) {
  const auto s = set_at("square", 128);
  const GridFunction f = sine(s.grid());
  const RadiusLadder ladder(s.grid().h(), s.grid().r_max(), 4.0);
  for (auto _ : st) benchmark::DoNotOptimize(LocalApproxField(f, &s.cells, 2, ladder, {}));
}
BENCHMARK(BM_LocalApproxField)->Unit(benchmark::kMillisecond);

void BM_TraceNorm(benchmark::State& st) {
  const auto s = set_at("square", 128);
  const GridFunction f = sine(s.grid());
  const RadiusLadder ladder(s.grid().h(), s.grid().r_max(), 4.0);
  const LocalApproxField field(f, &s.cells, 1, ladder, {});
  SpaceParams v;
  v.s = 0.7;
  v.k = 1;
  v.p = 2;
  v.q = 2;
  v.u = 1;
  for (auto _ : st) benchmark::DoNotOptimize(trace_norm(Space::besov, f, field, v));
}
BENCHMARK(BM_TraceNorm)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
