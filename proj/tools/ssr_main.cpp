#include "ssr/config.hpp"
#include "ssr/dictionary.hpp"
#include "ssr/io.hpp"
#include "ssr/masr.hpp"
#include "ssr/metrics.hpp"
#include "ssr/pansharpen.hpp"
#include "ssr/pipeline.hpp"
#include "ssr/simulate.hpp"
#include "ssr/specrecon.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>

namespace fs = std::filesystem;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out;
    std::string config;
};

void add_common(CLI::App* sub, Common& c, bool out_required) {
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--threads", c.threads, "worker threads (0 = default)")->check(CLI::NonNegativeNumber);
    auto* o = sub->add_option("--out", c.out, "output path");
    if (out_required) o->required();
}

ssr::PipelineConfig config_for(const Common& c) {
    ssr::PipelineConfig cfg = c.config.empty() ? ssr::PipelineConfig{} : ssr::load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

std::string format_factor(double v) {
    char buf[32];
    if (v == std::round(v)) {
        std::snprintf(buf, sizeof(buf), "%.1f", v);
    } else {
        std::snprintf(buf, sizeof(buf), "%.6g", v);
    }
    return buf;
}

ssr::MultiBandField read_field(const std::string& path, std::size_t bands) {
    const ssr::CubeFile f = ssr::read_cube_file(path);
    if (bands && f.q_bands() != bands) {
        throw ssr::Error(path + ": expected " + std::to_string(bands) + " bands, found " +
                         std::to_string(f.q_bands()));
    }
    return f.to_field();
}

std::vector<double> index_grid(std::size_t n) {
    std::vector<double> v(n);
    std::iota(v.begin(), v.end(), 0.0);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-aperture spectral super-resolution"};
    app.require_subcommand(1);

    Common common;

    ssr::OpticsSpec optics;
    auto* sr = app.add_subcommand("sr-factor", "theoretical super-resolution factor");
    add_common(sr, common, false);
    sr->add_option("--aperture-mm", optics.aperture_diameter_mm);
    sr->add_option("--focal-mm", optics.focal_length_mm);
    sr->add_option("--pitch-um", optics.pixel_pitch_um);
    sr->add_option("--wavelength-nm", optics.wavelength_nm);
    sr->add_option("--apertures", optics.k_apertures);

    std::string cube_path;
    auto* sim = app.add_subcommand("simulate", "simulate the aperture captures of a cube");
    add_common(sim, common, true);
    sim->add_option("--cube", cube_path, "ground-truth cube file")->required();
    sim->add_option("--config", common.config, "experiment config");

    std::string stack_dir;
    int iters = 0;
    auto* sup = app.add_subcommand("superresolve", "super-resolve the pan image from a capture stack");
    add_common(sup, common, true);
    sup->add_option("--stack", stack_dir, "capture stack directory")->required();
    sup->add_option("--config", common.config, "experiment config");
    sup->add_option("--iters", iters, "iteration count (default from config)");

    std::string pan_path;
    auto* pans = app.add_subcommand("pansharpen", "lift every capture to the pan grid");
    add_common(pans, common, true);
    pans->add_option("--stack", stack_dir, "capture stack directory")->required();
    pans->add_option("--pan", pan_path, "super-resolved pan image (1-band cube)")->required();
    pans->add_option("--config", common.config, "experiment config");

    std::vector<std::string> train_cubes;
    int sparsity = 8, ksvd_iters = 30;
    std::size_t stride = 4, max_samples = 20000, atoms = 0;
    auto* train = app.add_subcommand("train-dict", "train a spectral dictionary");
    add_common(train, common, true);
    train->add_option("--cubes", train_cubes, "training cube files")->required()->delimiter(',');
    train->add_option("--sparsity", sparsity);
    train->add_option("--iters", ksvd_iters);
    train->add_option("--stride", stride);
    train->add_option("--max-samples", max_samples);
    train->add_option("--atoms", atoms, "atom count (0 = 2Q)");

    std::string sharpened_path, dict_path;
    auto* rec = app.add_subcommand("reconstruct", "recover the spectral cube from pan-sharpened images");
    add_common(rec, common, true);
    rec->add_option("--stack", stack_dir, "capture stack directory (filters, wavelengths)")->required();
    rec->add_option("--sharpened", sharpened_path, "pan-sharpened apertures")->required();
    rec->add_option("--pan", pan_path, "super-resolved pan image")->required();
    rec->add_option("--dict", dict_path, "dictionary file")->required();
    rec->add_option("--config", common.config, "experiment config");

    std::string ref_path, est_path, scene = "scene";
    auto* ev = app.add_subcommand("evaluate", "compare two cubes");
    add_common(ev, common, false);
    ev->add_option("--reference", ref_path)->required();
    ev->add_option("--estimate", est_path)->required();
    ev->add_option("--scene", scene);

    auto* pipe = app.add_subcommand("pipeline", "run the full experiment from a config");
    add_common(pipe, common, false);
    pipe->add_option("--config", common.config, "experiment config");

    std::string moving_path;
    auto* reg = app.add_subcommand("register", "integer translation between two images");
    add_common(reg, common, false);
    reg->add_option("--reference", ref_path)->required();
    reg->add_option("--moving", moving_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (common.threads > 0) omp_set_num_threads(common.threads);

        if (*sr) {
            std::cout << format_factor(ssr::sr_factor(optics)) << "\n";
        } else if (*sim) {
            const ssr::PipelineConfig cfg = config_for(common);
            const ssr::SpectralCube truth = ssr::read_cube(cube_path);
            ssr::CaptureOptions opts;
            opts.noise_sigma = cfg.noise_sigma;
            opts.seed = cfg.seed;
            opts.kernel = cfg.kernel;
            const auto stack = ssr::simulate_capture(truth, cfg.filters, cfg.scene_transforms(cfg.seed), cfg.r, opts);
            ssr::write_stack(common.out, stack);
        } else if (*sup) {
            const ssr::PipelineConfig cfg = config_for(common);
            const ssr::ApertureStack stack = ssr::read_stack(stack_dir);
            const auto g = ssr::build_system_matrix(stack.transforms(), stack.size(), stack.r, stack.high_height(),
                                                    stack.high_width(), cfg.kernel);
            const auto res = ssr::ml_superresolve(stack, g, iters > 0 ? iters : cfg.params.masr_iters);
            ssr::MultiBandField f(1, res.estimate.height, res.estimate.width);
            f.set_band(0, res.estimate);
            ssr::write_cube_file(common.out, ssr::CubeFile::from_field(f, {0.0}));
        } else if (*pans) {
            const ssr::PipelineConfig cfg = config_for(common);
            const ssr::ApertureStack stack = ssr::read_stack(stack_dir);
            ssr::PansharpenProblem p;
            for (const auto& c : stack.captures) p.observations.push_back(c.image);
            p.pan = read_field(pan_path, 1).band_image(0);
            p.operators = ssr::build_aperture_operators(stack.transforms(), stack.r, stack.high_height(),
                                                        stack.high_width(), cfg.kernel);
            p.params = cfg.params.pansharpen;
            p.vtv = cfg.params.vtv;
            const auto res = ssr::pansharpen(p);
            ssr::write_cube_file(common.out, ssr::CubeFile::from_field(res.bands, index_grid(stack.size())));
        } else if (*train) {
            std::vector<Eigen::MatrixXd> parts;
            for (const auto& path : train_cubes) parts.push_back(ssr::sample_spectra(ssr::read_cube(path), stride));
            const std::uint64_t seed = common.seed.value_or(0);
            ssr::KsvdOptions opts;
            opts.n_atoms = atoms;
            opts.sparsity = sparsity;
            opts.iterations = ksvd_iters;
            opts.seed = seed;
            ssr::Dictionary d = ssr::train_dictionary(ssr::merge_samples(parts, max_samples, seed), opts);
            d.source_scenes = train_cubes;
            ssr::write_dictionary(common.out, d);
        } else if (*rec) {
            const ssr::PipelineConfig cfg = config_for(common);
            const ssr::ApertureStack stack = ssr::read_stack(stack_dir);
            const auto raw = ssr::build_filter_bank(stack.filters(), stack.wavelengths_nm);
            const auto resp = ssr::StackedResponse::from_raw(raw, read_field(sharpened_path, stack.size()),
                                                             stack.wavelengths_nm);
            const auto res = ssr::spectral_reconstruct(resp, ssr::read_dictionary(dict_path),
                                                       read_field(pan_path, 1).band_image(0), cfg.params);
            ssr::write_cube(common.out, res.cube);
        } else if (*ev) {
            const auto rep = ssr::evaluate(ssr::read_cube(ref_path), ssr::read_cube(est_path), scene);
            const std::string text = ssr::format_report(rep);
            std::cout << text;
            if (!common.out.empty()) std::ofstream(common.out) << text;
        } else if (*pipe) {
            ssr::PipelineConfig cfg = config_for(common);
            if (!common.out.empty()) cfg.output_dir = common.out;
            const auto res = ssr::run_pipeline(cfg, &std::cerr);
            for (const auto& s : res.scenes) std::cout << ssr::format_report(s.report);
            std::cout << "total_seconds = " << res.total_seconds << "\n";
        } else if (*reg) {
            const auto t = ssr::register_translation(ssr::read_gray_image(ref_path), ssr::read_gray_image(moving_path));
            std::cout << "dx = " << t.dx << "\ndy = " << t.dy << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
