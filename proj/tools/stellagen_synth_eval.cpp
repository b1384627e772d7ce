// Synthetic stand-in for an external field evaluator, demonstrating the adapter
// contract used by `stellagen evaluate --field command`:
//
//   <command> <surface.json> <out-prefix> [flags]
//
// must write <out-prefix>.field.json (FieldOnSurface: nfp, helicity, grid, B,
// weights) and <out-prefix>.scalars.json ({"mean_iota": ..., "aspect_ratio": ...}).
// A real MHD solver would replace this tool; here B is an analytic model field
// on the surface's own grid.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "stellagen/qsmetrics.hpp"
#include "stellagen/surface.hpp"

namespace sg = stellagen;

int main(int argc, char** argv) {
    CLI::App app{"synthetic external-evaluator stub"};
    std::string surface_path, out_prefix;
    int helicity = 0, grid = 0;
    double b0 = 1.0, qs_amp = 0.1, ripple = 0.0, iota = 0.5;
    app.add_option("surface", surface_path, "surface JSON path")->required();
    app.add_option("out", out_prefix, "output prefix")->required();
    app.add_option("--helicity", helicity, "symmetry type N (0 or 1)");
    app.add_option("--grid", grid, "square grid resolution (0 = rule default)");
    app.add_option("--b0", b0, "mean field strength");
    app.add_option("--qs-amp", qs_amp, "quasisymmetric modulation amplitude");
    app.add_option("--ripple", ripple, "symmetry-breaking ripple amplitude");
    app.add_option("--iota", iota, "reported mean rotational transform");
    CLI11_PARSE(app, argc, argv);

    try {
        sg::FourierSurface s = sg::read_surface_json(surface_path);
        int ng = grid > 0 ? grid : std::max(sg::default_n_phi(s), sg::default_n_theta(s));
        sg::SurfaceGrid g = sg::build_grid(s, ng, ng);
        sg::FieldOnSurface f = sg::synthetic_field(g, s.nfp(), helicity, b0, qs_amp, ripple);
        {
            std::ofstream out(out_prefix + ".field.json");
            if (!out) throw std::runtime_error("cannot write field file");
            out << sg::field_to_json(f).dump() << '\n';
        }
        sg::GeometrySummary geo = sg::geometry_from_grid(g);
        {
            std::ofstream out(out_prefix + ".scalars.json");
            if (!out) throw std::runtime_error("cannot write scalars file");
            out << nlohmann::json{{"mean_iota", iota}, {"aspect_ratio", geo.aspect_ratio}}.dump()
                << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "synth-eval error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
