// bgs: command-line driver for the block Gram-Schmidt stability experiments.
//
//   bgs sweep --family laeuchli --out laeuchli.csv
//   bgs gen --family glued --c1 3 --c2 3 --out x.csv
//   bgs qr --in x.csv --s 4 --variant bcgsi+ls-mp
//   bgs check

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bgs/checks.hpp"
#include "bgs/harness.hpp"

#ifndef BGS_DEFAULT_GOLDEN
#define BGS_DEFAULT_GOLDEN ""
#endif

namespace {

using namespace bgs;

struct FamilyFlags {
    std::string family;
    std::optional<index_t> m, p, s, n;
    std::vector<double> eta, svec;
    std::optional<double> c1, c2;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd, bool lists) {
        cmd->add_option("--family", family, "laeuchli | monomial | glued")
            ->check(CLI::IsMember({"laeuchli", "monomial", "glued"}));
        cmd->add_option("--m", m, "rows");
        cmd->add_option("--p", p, "number of blocks");
        cmd->add_option("--s", s, "block width");
        cmd->add_option("--c1", c1, "glued: log10 condition of the base block");
        cmd->add_option("--c2", c2, "glued: log10 gluing gap");
        cmd->add_option("--seed", seed, "generator seed (monomial, glued)");
        if (lists) {
            cmd->add_option("--eta", eta, "laeuchli: eta values (comma separated)")
                ->delimiter(',');
            cmd->add_option("--svec", svec,
                            "monomial: block widths; glued: knob values, c1 = c2 = svec/2")
                ->delimiter(',');
            cmd->add_option("--n", n, "monomial: total columns (default 240)");
        } else {
            eta.resize(1, 1e-3);
            cmd->add_option("--eta", eta[0], "laeuchli: eta in (0, 1)");
        }
    }

    harness::FamilyOptions options() const {
        harness::FamilyOptions o;
        o.m = m;
        o.p = p;
        o.s = s;
        o.n = n;
        o.eta = eta;
        o.svec = svec;
        o.c1 = c1;
        o.c2 = c2;
        o.seed = seed;
        return o;
    }
};

void require_precision(const std::string& precision) {
    if (precision != F32F64::name) {
        throw std::invalid_argument("unsupported precision '" + precision +
                                    "' (supported: f32f64)");
    }
}

std::vector<Variant> parse_variants(const std::vector<std::string>& names) {
    std::vector<Variant> out;
    for (const auto& name : names) {
        const auto v = parse_variant(name);
        if (!v) {
            throw std::invalid_argument("unknown variant '" + name +
                                        "' (bcgs, bcgsi+, bcgsi+ls, bcgsi+ls-mp)");
        }
        out.push_back(*v);
    }
    return out;
}

int cmd_sweep(const FamilyFlags& ff, const std::vector<std::string>& variants,
              const std::string& precision, const std::string& out, const std::string& preset,
              unsigned jobs) {
    require_precision(precision);
    harness::SweepSpec spec;
    if (preset == "mini") {
        spec = checks::mini_sweep_spec();
    } else {
        if (ff.family.empty()) {
            throw std::invalid_argument("sweep: --family is required (or --preset mini)");
        }
        spec.points = harness::family_sweep(*harness::parse_family(ff.family), ff.options());
    }
    if (!variants.empty()) {
        spec.variants = parse_variants(variants);
    }
    spec.precision = precision;
    spec.out_path = out;
    spec.jobs = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
    const auto records = harness::run_sweep(spec);
    if (out.empty() || out == "-") {
        harness::write_csv(records, std::cout);
    } else {
        harness::emit_csv(records, out);
        std::cerr << "wrote " << records.size() << " records to " << out << '\n';
    }
    return 0;
}

int cmd_gen(const FamilyFlags& ff, const std::string& out) {
    if (ff.family.empty()) {
        throw std::invalid_argument("gen: --family is required");
    }
    harness::FamilyParams prm;
    switch (*harness::parse_family(ff.family)) {
    case harness::Family::laeuchli: {
        testmats::LaeuchliParams lp;
        lp.m = ff.m.value_or(lp.m);
        lp.p = ff.p.value_or(lp.p);
        lp.s = ff.s.value_or(lp.s);
        lp.eta = ff.eta.front();
        prm = lp;
        break;
    }
    case harness::Family::monomial: {
        testmats::MonomialParams mp;
        mp.m = ff.m.value_or(mp.m);
        mp.p = ff.p.value_or(mp.p);
        mp.s = ff.s.value_or(mp.s);
        mp.seed = ff.seed;
        prm = mp;
        break;
    }
    case harness::Family::glued: {
        testmats::GluedParams gp;
        gp.m = ff.m.value_or(gp.m);
        gp.p = ff.p.value_or(gp.p);
        gp.s = ff.s.value_or(gp.s);
        gp.c1 = ff.c1.value_or(gp.c1);
        gp.c2 = ff.c2.value_or(gp.c2);
        gp.seed = ff.seed;
        prm = gp;
        break;
    }
    }
    const Matrix<float> x = harness::generate<float>(prm);
    if (out.empty() || out == "-") {
        harness::write_matrix_csv(x, std::cout);
        return 0;
    }
    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error("gen: cannot open '" + out + "' for writing");
    }
    harness::write_matrix_csv(x, os);
    if (!os.flush()) {
        throw std::runtime_error("gen: write to '" + out + "' failed");
    }
    return 0;
}

int cmd_qr(const std::string& in, index_t s, const std::string& variant,
           const std::string& precision) {
    require_precision(precision);
    std::ifstream is(in);
    if (!is) {
        throw std::runtime_error("qr: cannot open '" + in + "'");
    }
    const Matrix<float> x = harness::read_matrix_csv<float>(is);
    const BlockPartition part = BlockPartition::of(x, s);
    const Variant v = parse_variants({variant}).front();
    std::cout << "variant " << variant_name(v) << "\nm " << part.m << "\np " << part.p
              << "\ns " << part.s << "\nkappa " << harness::format_real(cond2(x)) << '\n';
    try {
        const auto qr = run_variant<F32F64>(v, x, part);
        std::cout << "loo " << harness::format_real(loss_of_orthogonality(qr.q)) << "\nresidual "
                  << harness::format_real(qr_residual(x, qr.q, qr.r)) << "\nsync_events "
                  << qr.sync_events << '\n';
    } catch (const BreakdownError& e) {
        std::cout << "breakdown_block " << e.block() << '\n';
        std::cerr << "qr: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int cmd_check(const std::string& golden, unsigned jobs) {
    checks::CheckOptions opt;
    opt.golden_path = golden;
    opt.jobs = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
    int failed = 0;
    for (const auto& r : checks::run_all(opt)) {
        std::cout << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": "
                  << r.detail << std::endl;
        failed += r.passed ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " failed")
              << '\n';
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block Gram-Schmidt stability experiments"};
    app.require_subcommand(1);

    auto* sweep = app.add_subcommand("sweep", "run a condition-number sweep, write CSV");
    FamilyFlags sweep_ff;
    sweep_ff.attach(sweep, true);
    std::vector<std::string> variants;
    std::string precision{F32F64::name};
    std::string out;
    std::string preset;
    unsigned jobs = 1;
    sweep->add_option("--variants", variants, "comma-separated variant list")->delimiter(',');
    sweep->add_option("--precision", precision, "working/high pair")->capture_default_str();
    sweep->add_option("--out", out, "output CSV path (default stdout)");
    sweep->add_option("--preset", preset, "built-in sweep instead of --family")
        ->check(CLI::IsMember({"mini"}));
    sweep->add_option("--jobs", jobs, "worker threads, 0 = all cores")->capture_default_str();

    auto* gen = app.add_subcommand("gen", "write one test matrix (binary32) as CSV");
    FamilyFlags gen_ff;
    gen_ff.attach(gen, false);
    std::string gen_out;
    gen->add_option("--out", gen_out, "output path (default stdout)");

    auto* qr = app.add_subcommand("qr", "factor a matrix file, print loo/residual/syncs");
    std::string qr_in;
    index_t qr_s = 1;
    std::string qr_variant = "bcgsi+ls-mp";
    std::string qr_precision{F32F64::name};
    qr->add_option("--in", qr_in, "matrix CSV, one row per line")->required();
    qr->add_option("--s", qr_s, "block width")->required();
    qr->add_option("--variant", qr_variant, "variant name")->capture_default_str();
    qr->add_option("--precision", qr_precision, "working/high pair")->capture_default_str();

    auto* check = app.add_subcommand("check", "run the invariant suite; nonzero exit on failure");
    std::string golden = BGS_DEFAULT_GOLDEN;
    unsigned check_jobs = 0;
    check->add_option("--golden", golden, "frozen mini-sweep CSV")->capture_default_str();
    check->add_option("--jobs", check_jobs, "worker threads, 0 = all cores")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) {
            return cmd_sweep(sweep_ff, variants, precision, out, preset, jobs);
        }
        if (*gen) {
            return cmd_gen(gen_ff, gen_out);
        }
        if (*qr) {
            return cmd_qr(qr_in, qr_s, qr_variant, qr_precision);
        }
        return cmd_check(golden, check_jobs);
    } catch (const std::exception& e) {
        std::cerr << "bgs: " << e.what() << '\n';
        return 1;
    }
}
