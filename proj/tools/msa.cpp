// msa: command-line front end for the multiscale averaging library.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <new>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "msa/cantor.hpp"
#include "msa/lagrangian.hpp"
#include "msa/multiscale.hpp"
#include "msa/ns_synth.hpp"
#include "msa/parallel.hpp"
#include "msa/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kResource = 3 };

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream o(path);
    if (!o) throw msa::ResourceError("cannot write " + path);
    o << text;
}

std::string csv_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string reports_csv(const std::string& suite, const std::vector<msa::VerificationReport>& rs) {
    std::ostringstream os;
    os << "suite,id,kind,grid,trial,name,lhs,rhs,ratio,verdict\n";
    for (const auto& r : rs)
        for (const auto& row : r.rows)
            os << suite << ',' << r.id << ',' << r.kind << ',' << row.grid << ',' << row.trial << ',' << row.name << ','
               << csv_num(row.lhs) << ',' << csv_num(row.rhs) << ',' << csv_num(row.ratio) << ','
               << (r.pass ? "PASS" : "FAIL") << '\n';
    return os.str();
}

void print_summary(const std::vector<msa::VerificationReport>& rs) {
    for (const auto& r : rs) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.id << " [" << r.kind << "]";
        if (r.kind == "refinement") {
            std::cout << " fitted=" << r.fitted << " series:";
            for (auto& [g, c] : r.refinement) std::cout << ' ' << g << ':' << c;
        } else if (r.violations) {
            std::cout << " violations=" << r.violations;
        }
        std::cout << '\n';
    }
}

msa::Mode parse_mode(const std::string& m) {
    if (m == "space") return msa::Mode::Space;
    if (m == "spacetime") return msa::Mode::Spacetime;
    throw msa::UsageError("mode must be space or spacetime");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale averaging toolkit"};
    app.require_subcommand(1);
    std::string report, csv;
    int threads = 0;
    app.add_option("--threads", threads, "worker cap (default: MSA_THREADS or hardware)");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a flow series");
    std::string field = "taylor-green", out_dir;
    double nu = 1.0, tmax = 1.0, dt = 1e-3, amplitude = 0.25;
    int grid = 64, snapshots = 32;
    unsigned seed = 1;
    gen->add_option("--field", field)->check(CLI::IsMember({"taylor-green", "random"}));
    gen->add_option("--nu", nu);
    gen->add_option("--grid", grid);
    gen->add_option("--tmax", tmax);
    gen->add_option("--dt", dt);
    gen->add_option("--snapshots", snapshots);
    gen->add_option("--amplitude", amplitude);
    gen->add_option("--seed", seed);
    gen->add_option("--out", out_dir)->required();

    // scale
    auto* scale = app.add_subcommand("scale", "scale operator of a stored scalar field");
    std::string in, out, mode = "space";
    double alpha = 1.0;
    int ladder_k = 8, ladder_m = 6;
    scale->add_option("--in", in)->required();
    scale->add_option("--alpha", alpha)->required();
    scale->add_option("--mode", mode);
    scale->add_option("--ladder-k", ladder_k);
    scale->add_option("--ladder-m", ladder_m);
    scale->add_option("--out", out);
    scale->add_option("--report", report);
    scale->add_option("--csv", csv);

    // lagrangian-scale
    auto* lag = app.add_subcommand("lagrangian-scale", "capped scale operator along a drift");
    std::string drift;
    double eta0 = 0.0;
    lag->add_option("--in", in)->required();
    lag->add_option("--drift", drift);
    lag->add_option("--alpha", alpha)->required();
    lag->add_option("--eta0", eta0, "0: the default for the dimension");
    lag->add_option("--ladder-k", ladder_k);
    lag->add_option("--ladder-m", ladder_m);
    lag->add_option("--out", out);
    lag->add_option("--report", report);
    lag->add_option("--csv", csv);

    // cantor
    auto* can = app.add_subcommand("cantor", "superlevel bounds of the Cantor approximants");
    int depth = 8;
    can->add_option("--depth", depth);
    can->add_option("--report", report);
    can->add_option("--csv", csv);

    // verify
    auto* ver = app.add_subcommand("verify", "run a verification suite");
    msa::SuiteConfig cfg;
    std::string grids;
    ver->add_option("--suite", cfg.suite)->required()->check(CLI::IsMember(msa::suite_names()));
    ver->add_option("--grids", grids, "comma separated, e.g. 32,64");
    ver->add_option("--trials", cfg.trials);
    ver->add_option("--seed", cfg.seed);
    ver->add_option("--band", cfg.band);
    ver->add_option("--epsilon", cfg.epsilon);
    ver->add_option("--depth", cfg.depth);
    ver->add_option("--lorentz-n", cfg.lorentz_n);
    ver->add_option("--report", report);
    ver->add_option("--csv", csv);

    // lattice
    auto* lat = app.add_subcommand("lattice", "mixed-norm lattice of a Taylor-Green series as CSV");
    double t0 = 0.25;
    lat->add_option("--grid", grid);
    lat->add_option("--nu", nu);
    lat->add_option("--tmax", tmax);
    lat->add_option("--snapshots", snapshots);
    lat->add_option("--amplitude", amplitude);
    lat->add_option("--t0", t0);
    lat->add_option("--csv", csv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }

    try {
        if (threads > 0) msa::set_thread_count(threads);
        msa::ScaleLadder ladder;
        ladder.k = ladder_k;
        ladder.m = ladder_m;

        if (*gen) {
            const msa::GridSpec g = msa::ns_grid(grid);
            const msa::VectorField u0 = field == "random" ? msa::random_solenoidal(g, seed, amplitude)
                                                          : msa::taylor_green_velocity(g, amplitude);
            msa::SolverConfig sc;
            sc.nu = nu;
            sc.T = tmax;
            sc.dt = dt;
            sc.snapshots = snapshots;
            const msa::FlowSeries s = msa::spectral_solve(u0, sc);
            fs::create_directories(out_dir);
            msa::save_field((fs::path(out_dir) / "u.msf").string(), s.u, "velocity");
            msa::save_field((fs::path(out_dir) / "omega.msf").string(), s.omega, "vorticity");
            msa::save_field((fs::path(out_dir) / "P.msf").string(), s.P, "pressure");
            std::ostringstream os;
            os << "k,t,energy,dissipation,energy_half_plus_dissipation\n";
            os << "-1,0," << csv_num(s.energy0) << ",0," << csv_num(0.5 * s.energy0) << '\n';
            for (int k = 0; k < s.time.nt; ++k)
                os << k << ',' << csv_num(s.time.time(k)) << ',' << csv_num(s.energy[k]) << ','
                   << csv_num(s.dissipation[k]) << ',' << csv_num(0.5 * s.energy[k] + s.dissipation[k]) << '\n';
            write_text((fs::path(out_dir) / "energy.csv").string(), os.str());
            std::cout << "wrote " << out_dir << " (energy excess " << s.energy_excess() << ")\n";
            return kPass;
        }

        if (*scale) {
            const msa::ScalarField f = msa::load_scalar(in);
            const msa::ScaleField sf = msa::scale_op(f, alpha, ladder, parse_mode(mode));
            if (!out.empty()) {
                msa::save_field(out + ".s.msf", sf.s_field(), "scale");
                msa::save_field(out + ".a.msf", sf.a_field(), "average");
                msa::save_field(out + ".label.msf", sf.label_field(), "label");
            }
            std::size_t sing = 0, fin = 0;
            for (std::size_t i = 0; i < sf.size(); ++i) {
                sing += sf.label[i];
                fin += std::isfinite(sf.s[i]);
            }
            json j{{"alpha", alpha}, {"mode", mode}, {"points", sf.size()}, {"finite", fin}, {"singular", sing},
                   {"rho_min", sf.ladder.rho_min}, {"rho_max", sf.ladder.rho_max}};
            write_text(report, j.dump(2));
            if (!csv.empty()) {
                std::ostringstream os;
                os << "index,s,a,label\n";
                for (std::size_t i = 0; i < sf.size(); ++i)
                    os << i << ',' << csv_num(sf.s[i]) << ',' << csv_num(sf.a[i]) << ',' << int(sf.label[i]) << '\n';
                write_text(csv, os.str());
            }
            std::cout << j.dump() << '\n';
            return kPass;
        }

        if (*lag) {
            const msa::ScalarField f = msa::load_scalar(in);
            msa::VectorField b;
            if (!drift.empty()) b = msa::load_vector(drift);
            msa::AdmissibilityParams params = msa::AdmissibilityParams::defaults(f.grid.D);
            if (eta0 > 0.0) params.eta0 = eta0;
            const msa::CappedScaleField c = msa::capped_scale_op(f, b, alpha, ladder, params);
            std::size_t parts[4] = {0, 0, 0, 0};
            for (auto p : c.part) ++parts[p];
            if (!out.empty()) {
                msa::ScalarField s = msa::ScalarField::make(f.grid, f.time), pf = s;
                for (std::size_t i = 0; i < c.size(); ++i) {
                    s.data[c.anchors[i]] = c.s[i];
                    pf.data[c.anchors[i]] = c.part[i];
                }
                msa::save_field(out + ".s.msf", s, "capped-scale");
                msa::save_field(out + ".part.msf", pf, "partition");
            }
            json j{{"alpha", alpha},      {"eta0", params.eta0},   {"points", c.size()},
                   {"reg_lt", parts[0]}, {"reg_eq", parts[1]},    {"sing_lt", parts[2]},
                   {"sing_eq", parts[3]}};
            write_text(report, j.dump(2));
            if (!csv.empty()) {
                std::ostringstream os;
                os << "anchor,s,S,r_bar,a_lt,a_eq,part\n";
                for (std::size_t i = 0; i < c.size(); ++i)
                    os << c.anchors[i] << ',' << csv_num(c.s[i]) << ',' << csv_num(c.S[i]) << ','
                       << csv_num(c.r_bar[i]) << ',' << csv_num(c.a_lt[i]) << ',' << csv_num(c.a_eq[i]) << ','
                       << int(c.part[i]) << '\n';
                write_text(csv, os.str());
            }
            std::cout << j.dump() << '\n';
            return kPass;
        }

        if (*can) {
            msa::SuiteConfig c;
            c.suite = "cantor";
            c.depth = depth;
            const auto rs = msa::run_suite(c);
            print_summary(rs);
            write_text(report, msa::reports_to_json(rs));
            if (!csv.empty()) write_text(csv, reports_csv("cantor", rs));
            return msa::all_pass(rs) ? kPass : kFail;
        }

        if (*ver) {
            if (!grids.empty()) {
                std::stringstream ss(grids);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    try {
                        cfg.grids.push_back(std::stoi(tok));
                    } catch (const std::exception&) {
                        throw msa::UsageError("bad grid list: " + grids);
                    }
                }
            }
            const auto rs = msa::run_suite(cfg);
            print_summary(rs);
            write_text(report, msa::reports_to_json(rs));
            if (!csv.empty()) write_text(csv, reports_csv(cfg.suite, rs));
            return msa::all_pass(rs) ? kPass : kFail;
        }

        if (*lat) {
            const msa::FlowSeries s =
                msa::taylor_green_series(nu, msa::ns_grid(grid), tmax, snapshots, amplitude);
            const std::string text = msa::mixed_norm_lattice(s, t0);
            if (csv.empty()) std::cout << text;
            else write_text(csv, text);
            return kPass;
        }
    } catch (const msa::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const msa::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return kResource;
    } catch (const std::bad_alloc&) {
        std::cerr << "resource error: out of memory\n";
        return kResource;
    } catch (const msa::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kUsage;
    } catch (const msa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const msa::FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
    return kUsage;
}
