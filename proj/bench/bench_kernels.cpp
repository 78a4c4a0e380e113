// Serial reference vs OpenMP kernels. Run with --benchmark_filter=<name> to pick one.

#include <random>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "voleta/frames.hpp"
#include "voleta/kernels.hpp"
#include "voleta/mesh.hpp"

using namespace voleta;

namespace {

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> pts(n);
    for (auto& p : pts)
        p = Vec3(u(rng), u(rng), u(rng));
    return pts;
}

cv::Mat noise_image(int w, int h, std::uint64_t seed)
{
    cv::Mat img(h, w, CV_64F);
    cv::RNG rng(seed);
    rng.fill(img, cv::RNG::UNIFORM, 0.0, 255.0);
    return img;
}

FrameSet noise_frames(int count, int w, int h)
{
    FrameSet frames;
    cv::RNG rng(7);
    for (int i = 0; i < count; ++i) {
        cv::Mat rgb(h, w, CV_8UC3);
        rng.fill(rgb, cv::RNG::UNIFORM, 0, 256);
        frames.push_back(make_frame(i, "f" + std::to_string(i), rgb));
    }
    return frames;
}

template <bool Parallel>
void BM_Nearest(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const KdTree tree(random_points(n, 1));
    const auto queries = random_points(n, 2);
    for (auto _ : state) {
        auto hits = Parallel ? kernels::nearest(tree, queries) : kernels::serial::nearest(tree, queries);
        benchmark::DoNotOptimize(hits.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_GaussianBlur(benchmark::State& state)
{
    const cv::Mat img = noise_image(640, 480, 3);
    const int radius = static_cast<int>(state.range(0));
    for (auto _ : state) {
        cv::Mat out = Parallel ? kernels::gaussian_blur(img, radius) : kernels::serial::gaussian_blur(img, radius);
        benchmark::DoNotOptimize(out.data);
    }
}

template <bool Parallel>
void BM_FrameFeatures(benchmark::State& state)
{
    const auto frames = noise_frames(static_cast<int>(state.range(0)), 160, 120);
    const auto radii = radius_range(0, 30, 2);
    for (auto _ : state) {
        auto f = Parallel ? kernels::frame_features(frames, radii) : kernels::serial::frame_features(frames, radii);
        benchmark::DoNotOptimize(f.data());
    }
}

template <bool Parallel>
void BM_SignedVolume(benchmark::State& state)
{
    const auto mesh = make_icosphere(1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        double v = Parallel ? kernels::signed_volume(mesh.vertices, mesh.triangles)
                            : kernels::serial::signed_volume(mesh.vertices, mesh.triangles);
        benchmark::DoNotOptimize(v);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.triangles.size()));
}

} // namespace

BENCHMARK(BM_Nearest<false>)->Name("nearest/serial")->Arg(10000)->Arg(100000);
BENCHMARK(BM_Nearest<true>)->Name("nearest/parallel")->Arg(10000)->Arg(100000);
BENCHMARK(BM_GaussianBlur<false>)->Name("gaussian_blur/serial")->Arg(4)->Arg(30);
BENCHMARK(BM_GaussianBlur<true>)->Name("gaussian_blur/parallel")->Arg(4)->Arg(30);
BENCHMARK(BM_FrameFeatures<false>)->Name("frame_features/serial")->Arg(8);
BENCHMARK(BM_FrameFeatures<true>)->Name("frame_features/parallel")->Arg(8);
BENCHMARK(BM_SignedVolume<false>)->Name("signed_volume/serial")->Arg(6)->Arg(8);
BENCHMARK(BM_SignedVolume<true>)->Name("signed_volume/parallel")->Arg(6)->Arg(8);

int main(int argc, char** argv)
{
    benchmark::Initialize(&argc, argv);
    benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
}
