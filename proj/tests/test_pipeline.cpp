#include "ssr/dictionary.hpp"
#include "ssr/io.hpp"
#include "ssr/pipeline.hpp"
#include "ssr/synthetic.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>

using namespace ssr;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

PipelineConfig small_config(const fs::path& out) {
    PipelineConfig c;
    c.synthetic_height = c.synthetic_width = 24;
    c.synthetic_training_scenes = 2;
    c.dict_stride = 1;
    c.dict_iterations = 5;
    c.params.masr_iters = 10;
    c.params.pansharpen.iter_max = 20;
    c.output_dir = out;
    c.write_images = false;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("degenerate configuration reproduces the scene") {
    PipelineConfig c;
    c.synthetic_height = c.synthetic_width = 16;
    c.r = 1;
    c.wavelengths_nm = {550.0};
    c.filters.assign(9, NotchFilter::panchromatic());
    c.transform_mode = TransformMode::Explicit;
    c.transforms.assign(9, GeometricTransform{});
    c.output_dir.clear();
    c.seed = 12;
    // The l1 prior biases the minimiser by eta / K; switch priors off for an exact fit.
    c.params.specrecon.eta = 0.0;
    c.params.specrecon.eta_tv = 0.0;
    const auto res = run_pipeline(c);
    REQUIRE(res.scenes.size() == 1);
    const std::vector<double> wl{550.0};
    const SpectralCube truth = synthetic_scene(16, 16, wl, 12);
    CHECK(testutil::max_abs_diff(res.scenes[0].reconstruction.data(), truth.data()) <= 1e-6);
}

TEST_CASE("fixed seed gives bit-identical output files") {
    const fs::path root = fs::temp_directory_path() / "ssr_test_pipeline_det";
    fs::remove_all(root);
    (void)run_pipeline(small_config(root / "a"));
    (void)run_pipeline(small_config(root / "b"));
    const std::string a = slurp(root / "a" / "synthetic" / "reconstruction.ssrc");
    CHECK(!a.empty());
    CHECK(a == slurp(root / "b" / "synthetic" / "reconstruction.ssrc"));
    fs::remove_all(root);
}

TEST_CASE("dictionary cache is reused") {
    const fs::path root = fs::temp_directory_path() / "ssr_test_pipeline_cache";
    fs::remove_all(root);
    auto c = small_config(root / "a");
    c.dictionary_cache_dir = root / "cache";
    const auto first = run_pipeline(c);
    std::vector<fs::path> cached;
    for (const auto& e : fs::directory_iterator(root / "cache")) cached.push_back(e.path());
    REQUIRE(cached.size() == 1);
    CHECK(cached[0].extension() == ".ssrd");
    c.output_dir = root / "b";
    const auto second = run_pipeline(c);
    CHECK(second.scenes[0].reconstruction.data() == first.scenes[0].reconstruction.data());
    CHECK(second.scenes[0].timings.dictionary < first.scenes[0].timings.dictionary);
    fs::remove_all(root);
}

TEST_CASE("stage errors carry context") {
    const fs::path root = fs::temp_directory_path() / "ssr_test_pipeline_err";
    fs::remove_all(root);
    fs::create_directories(root);
    Dictionary d;
    d.atoms = Eigen::MatrixXd::Identity(5, 5);
    write_dictionary(root / "wrong.ssrd", d);
    auto c = small_config("");
    c.dictionary_path = root / "wrong.ssrd";
    try {
        (void)run_pipeline(c);
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("stage ") == 0);
        CHECK(msg.find("scene synthetic") != std::string::npos);
    }
    fs::remove_all(root);
}

TEST_CASE("64 x 64 synthetic run writes its artifacts in time") {
    const fs::path root = fs::temp_directory_path() / "ssr_test_pipeline_full";
    fs::remove_all(root);
    PipelineConfig c;
    c.output_dir = root;
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = run_pipeline(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 30.0);
    REQUIRE(res.scenes.size() == 1);
    const auto& s = res.scenes[0];
    CHECK(s.reconstruction.height() == 63);
    CHECK(s.report.rmse_8bit_global > 0.0);
    CHECK(s.report.sam_radians > 0.0);
    CHECK(s.timings.total > 0.0);
    const fs::path dir = root / "synthetic";
    for (const char* f : {"reconstruction.ssrc", "report.txt", "timing.json"}) CHECK(fs::exists(dir / f));
    CHECK(fs::exists(dir / "bands"));
    CHECK(fs::exists(dir / "errors"));
    CHECK(fs::exists(root / "report.txt"));
    CHECK(fs::exists(root / "config.ini"));
    CHECK(slurp(dir / "report.txt").find("synthetic.rmse_8bit = ") != std::string::npos);
    CHECK(to_text(load_config(root / "config.ini")) == to_text(c));
    fs::remove_all(root);
}
