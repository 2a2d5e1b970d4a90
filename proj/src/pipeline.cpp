#include "ssr/pipeline.hpp"

#include "ssr/io.hpp"
#include "ssr/operators.hpp"
#include "ssr/synthetic.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace ssr {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
auto staged(const std::string& stage, const std::string& scene, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw Error("stage " + stage + " (scene " + scene + "): " + e.what());
    }
}

struct SceneSource {
    std::string name;
    fs::path dir;             // dataset scenes
    std::uint64_t seed = 0;   // synthetic scenes
};

// Centre crop to the largest multiple of r.
SpectralCube crop_to_multiple(const SpectralCube& cube, std::size_t r) {
    const std::size_t h = cube.height() - cube.height() % r;
    const std::size_t w = cube.width() - cube.width() % r;
    if (h == cube.height() && w == cube.width()) return cube;
    if (h == 0 || w == 0) throw Error("scene is smaller than the downsampling factor");
    const std::size_t y0 = (cube.height() - h) / 2;
    const std::size_t x0 = (cube.width() - w) / 2;
    std::vector<double> data;
    data.reserve(cube.q_bands() * h * w);
    for (std::size_t q = 0; q < cube.q_bands(); ++q) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) data.push_back(cube.at(q, y0 + y, x0 + x));
        }
    }
    return SpectralCube(cube.wavelengths(), h, w, std::move(data));
}

class SceneLoader {
public:
    explicit SceneLoader(const PipelineConfig& c) : c_(c) {}

    SpectralCube load(const SceneSource& s) const { return crop_to_multiple(load_full(s), c_.r); }

    SpectralCube load_full(const SceneSource& s) const {
        if (!s.dir.empty()) {
            CaveLoadOptions opts;
            opts.expected_bands = c_.wavelengths_nm.size();
            opts.crop = c_.crop;
            opts.first_wavelength_nm = c_.wavelengths_nm.front();
            opts.wavelength_step_nm =
                c_.wavelengths_nm.size() > 1 ? c_.wavelengths_nm[1] - c_.wavelengths_nm[0] : 10.0;
            const SpectralCube cube = load_cave_scene(s.dir, opts);
            // Keep the configured grid, which may be an explicit list.
            return SpectralCube(c_.wavelengths_nm, cube.height(), cube.width(), cube.data());
        }
        return synthetic_scene(c_.synthetic_height, c_.synthetic_width, c_.wavelengths_nm, s.seed);
    }

    const Eigen::MatrixXd& samples(const SceneSource& s) {
        auto it = cache_.find(s.name);
        if (it == cache_.end()) {
            it = cache_.emplace(s.name, sample_spectra(load_full(s), c_.dict_stride)).first;
        }
        return it->second;
    }

private:
    const PipelineConfig& c_;
    std::map<std::string, Eigen::MatrixXd> cache_;
};

std::vector<SceneSource> test_scenes(const PipelineConfig& c, std::vector<SceneSource>& all_dataset) {
    std::vector<SceneSource> out;
    if (!c.dataset_path.empty()) {
        for (const auto& dir : list_cave_scenes(c.dataset_path)) {
            all_dataset.push_back({dir.filename().string(), dir, 0});
        }
        if (c.scenes.empty()) return all_dataset;
        for (const auto& name : c.scenes) {
            auto it = std::find_if(all_dataset.begin(), all_dataset.end(),
                                   [&](const SceneSource& s) { return s.name == name; });
            if (it == all_dataset.end()) {
                throw Error("config: scene '" + name + "' not found under " + c.dataset_path.string());
            }
            out.push_back(*it);
        }
        return out;
    }
    const std::vector<std::string> names = c.scenes.empty() ? std::vector<std::string>{"synthetic"} : c.scenes;
    for (std::size_t i = 0; i < names.size(); ++i) out.push_back({names[i], {}, c.seed + i});
    return out;
}

std::vector<SceneSource> training_scenes(const PipelineConfig& c, const SceneSource& test,
                                         const std::vector<SceneSource>& all_dataset) {
    std::vector<SceneSource> out;
    if (c.dataset_path.empty()) {
        for (std::size_t i = 0; i < c.synthetic_training_scenes; ++i) {
            out.push_back({"synthetic_train" + std::to_string(i), {}, c.seed + 1000 + i});
        }
        return out;
    }
    for (const auto& s : all_dataset) {
        const bool listed = c.dict_train_scenes.empty()
                                ? s.name != test.name
                                : std::find(c.dict_train_scenes.begin(), c.dict_train_scenes.end(), s.name) !=
                                      c.dict_train_scenes.end();
        if (listed) out.push_back(s);
    }
    return out;
}

Dictionary obtain_dictionary(const PipelineConfig& c, const SceneSource& test,
                             const std::vector<SceneSource>& all_dataset, SceneLoader& loader,
                             std::ostream* log) {
    if (!c.dictionary_path.empty()) return read_dictionary(c.dictionary_path);
    const std::size_t q = c.wavelengths_nm.size();
    if (q == 1) {
        Dictionary d;
        d.atoms = Eigen::MatrixXd::Ones(1, 1);
        return d;
    }
    const std::vector<SceneSource> train = training_scenes(c, test, all_dataset);
    if (train.empty()) throw Error("no training scenes for the dictionary");
    std::vector<std::string> names;
    for (const auto& s : train) names.push_back(s.name);
    const int sparsity = std::min<int>(c.dict_sparsity, static_cast<int>(q) - 1);

    fs::path cache_file;
    if (!c.dictionary_cache_dir.empty()) {
        std::ostringstream key;
        key << std::hex << std::setw(16) << std::setfill('0')
            << dictionary_cache_key(names, sparsity, c.dict_iterations, c.dict_stride, c.dict_max_samples,
                                    c.dict_atoms, c.seed, q);
        cache_file = c.dictionary_cache_dir / ("dict_" + key.str() + ".ssrd");
        if (fs::exists(cache_file)) {
            if (log) *log << "  dictionary: cached " << cache_file.string() << "\n";
            return read_dictionary(cache_file);
        }
    }
    std::vector<Eigen::MatrixXd> parts;
    for (const auto& s : train) parts.push_back(loader.samples(s));
    const Eigen::MatrixXd x = merge_samples(parts, c.dict_max_samples, c.seed);
    KsvdOptions opts;
    opts.n_atoms = c.dict_atoms;
    opts.sparsity = sparsity;
    opts.iterations = c.dict_iterations;
    opts.seed = c.seed;
    if (log) *log << "  dictionary: training on " << x.cols() << " spectra from " << train.size() << " scenes\n";
    Dictionary d = train_dictionary(x, opts);
    d.source_scenes = names;
    if (!cache_file.empty()) {
        fs::create_directories(c.dictionary_cache_dir);
        write_dictionary(cache_file, d);
    }
    return d;
}

std::string band_tag(std::size_t q, double wl) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "band%02zu_%.0fnm.png", q, wl);
    return buf;
}

nlohmann::json timings_json(const StageTimings& t) {
    return {{"load", t.load},           {"simulate", t.simulate},     {"masr", t.masr},
            {"pansharpen", t.pansharpen}, {"dictionary", t.dictionary}, {"specrecon", t.specrecon},
            {"metrics", t.metrics},     {"total", t.total}};
}

void write_outputs(const fs::path& dir, const SceneOutcome& s, const SpectralCube& truth, bool images) {
    fs::create_directories(dir);
    write_cube(dir / "reconstruction.ssrc", s.reconstruction);
    {
        std::ofstream os(dir / "report.txt");
        os << format_report(s.report);
    }
    {
        nlohmann::json j = timings_json(s.timings);
        std::ofstream os(dir / "timing.json");
        os << j.dump(2) << "\n";
    }
    if (!images) return;
    fs::create_directories(dir / "bands");
    fs::create_directories(dir / "errors");
    const auto& wl = s.reconstruction.wavelengths();
    for (std::size_t q = 0; q < s.reconstruction.q_bands(); ++q) {
        write_png(dir / "bands" / band_tag(q, wl[q]), cube_band(s.reconstruction, q));
        // x10: an error of 0.1 saturates.
        write_png(dir / "errors" / band_tag(q, wl[q]),
                  error_map(truth.band(q), s.reconstruction.band(q), truth.height(), truth.width(), 10.0));
    }
}

}  // namespace

ReconstructionOutput reconstruct_stack(const ApertureStack& stack, const Dictionary& dict,
                                       std::size_t pan_index, const SsrParams& params,
                                       DecimationKernel kernel) {
    stack.validate();
    params.validate();
    if (pan_index >= stack.size() || !stack.captures[pan_index].filter.is_panchromatic) {
        throw Error("reconstruct_stack: pan_index must name a panchromatic aperture");
    }
    ReconstructionOutput out;
    const std::size_t hh = stack.high_height();
    const std::size_t hw = stack.high_width();
    const auto transforms = stack.transforms();

    auto t0 = Clock::now();
    const SparseOperator g = build_system_matrix(transforms, stack.size(), stack.r, hh, hw, kernel);
    out.masr = staged("masr", "-", [&] { return ml_superresolve(stack, g, params.masr_iters); });
    out.timings.masr = seconds_since(t0);

    t0 = Clock::now();
    PansharpenProblem prob;
    for (const auto& c : stack.captures) prob.observations.push_back(c.image);
    prob.pan = out.masr.estimate;
    prob.operators = build_aperture_operators(transforms, stack.r, hh, hw, kernel);
    prob.params = params.pansharpen;
    prob.vtv = params.vtv;
    out.pansharpened = staged("pansharpen", "-", [&] { return pansharpen(prob); });
    out.timings.pansharpen = seconds_since(t0);

    t0 = Clock::now();
    const FilterBank raw = build_filter_bank(stack.filters(), stack.wavelengths_nm);
    const StackedResponse resp =
        StackedResponse::from_raw(raw, out.pansharpened.bands, stack.wavelengths_nm);
    out.spectral = staged("specrecon", "-",
                          [&] { return spectral_reconstruct(resp, dict, out.masr.estimate, params); });
    out.timings.specrecon = seconds_since(t0);
    return out;
}

Eigen::MatrixXd sample_spectra(const SpectralCube& cube, std::size_t stride) {
    if (stride == 0) throw Error("sample_spectra: stride must be >= 1");
    const std::size_t q = cube.q_bands();
    std::vector<std::size_t> pixels;
    for (std::size_t y = 0; y < cube.height(); y += stride) {
        for (std::size_t x = 0; x < cube.width(); x += stride) {
            bool nonzero = false;
            for (std::size_t b = 0; b < q && !nonzero; ++b) nonzero = cube.at(b, y, x) != 0.0;
            if (nonzero) pixels.push_back(y * cube.width() + x);
        }
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(pixels.size()));
    for (std::size_t j = 0; j < pixels.size(); ++j) {
        for (std::size_t b = 0; b < q; ++b) {
            out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = cube.band(b)[pixels[j]];
        }
    }
    return out;
}

Eigen::MatrixXd merge_samples(const std::vector<Eigen::MatrixXd>& parts, std::size_t max_samples,
                              std::uint64_t seed) {
    if (parts.empty()) throw Error("merge_samples: nothing to merge");
    Eigen::Index total = 0;
    for (const auto& p : parts) {
        if (p.rows() != parts.front().rows()) throw Error("merge_samples: spectra lengths differ");
        total += p.cols();
    }
    std::vector<std::pair<std::size_t, Eigen::Index>> index;
    index.reserve(static_cast<std::size_t>(total));
    for (std::size_t i = 0; i < parts.size(); ++i) {
        for (Eigen::Index j = 0; j < parts[i].cols(); ++j) index.emplace_back(i, j);
    }
    if (index.size() > max_samples) {
        std::mt19937_64 rng(seed);
        std::shuffle(index.begin(), index.end(), rng);
        index.resize(max_samples);
        std::sort(index.begin(), index.end());
    }
    Eigen::MatrixXd out(parts.front().rows(), static_cast<Eigen::Index>(index.size()));
    for (std::size_t k = 0; k < index.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = parts[index[k].first].col(index[k].second);
    }
    return out;
}

std::uint64_t dictionary_cache_key(const std::vector<std::string>& scenes, int sparsity, int iterations,
                                   std::size_t stride, std::size_t max_samples, std::size_t atoms,
                                   std::uint64_t seed, std::size_t q_bands) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    for (const auto& s : scenes) mix(s);
    for (auto v : {static_cast<std::uint64_t>(sparsity), static_cast<std::uint64_t>(iterations),
                   static_cast<std::uint64_t>(stride), static_cast<std::uint64_t>(max_samples),
                   static_cast<std::uint64_t>(atoms), seed, static_cast<std::uint64_t>(q_bands)}) {
        mix(std::to_string(v));
    }
    return h;
}

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log) {
    config.validate();
    const auto run_start = Clock::now();
    std::vector<SceneSource> all_dataset;
    const std::vector<SceneSource> scenes = test_scenes(config, all_dataset);
    SceneLoader loader(config);
    PipelineResult result;
    std::ostringstream combined;

    for (std::size_t si = 0; si < scenes.size(); ++si) {
        const SceneSource& src = scenes[si];
        const auto scene_start = Clock::now();
        SceneOutcome out;
        out.scene = src.name;
        if (log) *log << "scene " << src.name << "\n";

        auto t0 = Clock::now();
        const SpectralCube truth = staged("load", src.name, [&] { return loader.load(src); });
        out.timings.load = seconds_since(t0);

        t0 = Clock::now();
        const std::uint64_t scene_seed = config.seed + 7919 * si;
        const auto transforms = config.scene_transforms(scene_seed);
        CaptureOptions copts;
        copts.noise_sigma = config.noise_sigma;
        copts.seed = scene_seed;
        copts.kernel = config.kernel;
        const ApertureStack stack = staged("simulate", src.name, [&] {
            return simulate_capture(truth, config.filters, transforms, config.r, copts);
        });
        out.timings.simulate = seconds_since(t0);

        t0 = Clock::now();
        const Dictionary dict = staged("dictionary", src.name, [&] {
            return obtain_dictionary(config, src, all_dataset, loader, log);
        });
        out.timings.dictionary = seconds_since(t0);

        ReconstructionOutput rec = staged("reconstruct", src.name, [&] {
            return reconstruct_stack(stack, dict, config.pan_index, config.params, config.kernel);
        });
        out.timings.masr = rec.timings.masr;
        out.timings.pansharpen = rec.timings.pansharpen;
        out.timings.specrecon = rec.timings.specrecon;
        out.masr_fidelity = std::move(rec.masr.fidelity_history);
        out.pansharpen_energy = std::move(rec.pansharpened.energy_history);
        out.admm = std::move(rec.spectral.trace);
        out.reconstruction = std::move(rec.spectral.cube);

        t0 = Clock::now();
        out.report = staged("metrics", src.name, [&] { return evaluate(truth, out.reconstruction, src.name); });
        out.timings.metrics = seconds_since(t0);
        out.timings.total = seconds_since(scene_start);
        if (log) {
            *log << "  rmse_8bit " << out.report.rmse_8bit_global << "  sam " << out.report.sam_radians
                 << "  psnr " << out.report.mean_psnr_db << "  ssim " << out.report.mean_ssim << "  ("
                 << out.timings.total << " s)\n";
        }
        if (!config.output_dir.empty()) {
            staged("write", src.name, [&] {
                write_outputs(config.output_dir / src.name, out, truth, config.write_images);
                return 0;
            });
        }
        combined << format_report(out.report);
        result.scenes.push_back(std::move(out));
    }
    result.total_seconds = seconds_since(run_start);

    if (!config.output_dir.empty()) {
        fs::create_directories(config.output_dir);
        std::ofstream(config.output_dir / "report.txt") << combined.str();
        nlohmann::json j;
        j["total"] = result.total_seconds;
        for (const auto& s : result.scenes) j["scenes"][s.scene] = timings_json(s.timings);
        std::ofstream(config.output_dir / "timing.json") << j.dump(2) << "\n";
        std::ofstream(config.output_dir / "config.ini") << to_text(config);
    }
    return result;
}

}  // namespace ssr
