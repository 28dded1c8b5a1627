#include "kg2d/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "kg2d/diagnostics.hpp"
#include "kg2d/transform.hpp"

static_assert(std::endian::native == std::endian::little,
              "KGF1 writes raw little-endian doubles");

namespace kg2d {
namespace {

constexpr char kMagic[4] = {'K', 'G', 'F', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8 + 1;

struct Header {
    std::uint32_t n = 0;
    double L = 0.0;
    double t = 0.0;
    std::uint8_t kind = 0;
};

void write_header(std::ofstream& out, const Header& h) {
    char buf[kHeaderBytes];
    std::memcpy(buf, kMagic, 4);
    std::memcpy(buf + 4, &h.n, 4);
    std::memcpy(buf + 8, &h.L, 8);
    std::memcpy(buf + 16, &h.t, 8);
    std::memcpy(buf + 24, &h.kind, 1);
    out.write(buf, kHeaderBytes);
}

Header read_header(std::ifstream& in, const std::string& path) {
    char buf[kHeaderBytes];
    in.read(buf, kHeaderBytes);
    require(in.gcount() == static_cast<std::streamsize>(kHeaderBytes),
            path + ": truncated header");
    require(std::memcmp(buf, kMagic, 4) == 0,
            path + ": not a KGF1 snapshot (bad magic)");
    Header h;
    std::memcpy(&h.n, buf + 4, 4);
    std::memcpy(&h.L, buf + 8, 8);
    std::memcpy(&h.t, buf + 16, 8);
    std::memcpy(&h.kind, buf + 24, 1);
    require(h.kind == 0 || h.kind == 1,
            path + ": unknown field kind " + std::to_string(h.kind));
    return h;
}

void write_payload(std::ofstream& out, const void* data, std::size_t bytes,
                   const std::string& path) {
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(bytes));
    require(out.good(), path + ": write failed");
}

void write_meta(const std::string& path, nlohmann::json j) {
    j["format"] = "KGF1";
    std::ofstream out(meta_path_for(path));
    require(out.good(), "cannot open " + meta_path_for(path));
    out << j.dump(2) << '\n';
    require(out.good(), "failed writing " + meta_path_for(path));
}

nlohmann::json read_meta(const std::string& path) {
    const std::string mp = meta_path_for(path);
    std::ifstream in(mp);
    require(in.good(), "missing sidecar " + mp);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(mp + ": " + e.what());
    }
    return j;
}

}  // namespace

std::string meta_path_for(const std::string& path) {
    const std::string ext = ".kgf1";
    if (path.size() > ext.size() &&
        path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
        return path.substr(0, path.size() - ext.size()) + ".meta.json";
    }
    return path + ".meta.json";
}

void save_field(const RealField2D& f, double t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot open " + path);
    const Grid2D& g = f.grid();
    write_header(out, Header{static_cast<std::uint32_t>(g.n), g.box_length, t, 0});
    write_payload(out, f.data(), f.size() * sizeof(double), path);
    nlohmann::json j;
    j["content"] = "real-field";
    j["t"] = t;
    j["n"] = g.n;
    j["box_length"] = g.box_length;
    j["l2_norm"] = lp_norm(f, 2);
    write_meta(path, std::move(j));
}

void save_field(const ComplexField2D& f, double t, const std::string& path) {
    require(f.space() == Space::physical, "snapshots store physical fields");
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot open " + path);
    const Grid2D& g = f.grid();
    write_header(out, Header{static_cast<std::uint32_t>(g.n), g.box_length, t, 1});
    write_payload(out, f.data(), f.size() * sizeof(cplx), path);
    nlohmann::json j;
    j["content"] = "complex-field";
    j["t"] = t;
    j["n"] = g.n;
    j["box_length"] = g.box_length;
    j["l2_norm"] = lp_norm(f, 2);
    write_meta(path, std::move(j));
}

LoadedField load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open " + path);
    const Header h = read_header(in, path);
    const Grid2D g = Grid2D::make(static_cast<int>(h.n), h.L);
    const std::size_t doubles =
        g.size() * (h.kind == 1 ? 2 : 1) * sizeof(double);
    require(std::filesystem::file_size(path) == kHeaderBytes + doubles,
            path + ": payload size does not match the header");

    LoadedField out;
    out.t = h.t;
    out.complex_valued = h.kind == 1;
    if (h.kind == 0) {
        out.real = RealField2D(g);
        in.read(reinterpret_cast<char*>(out.real.data()),
                static_cast<std::streamsize>(doubles));
    } else {
        out.cplx = ComplexField2D(g, Space::physical);
        in.read(reinterpret_cast<char*>(out.cplx.data()),
                static_cast<std::streamsize>(doubles));
    }
    require(in.gcount() == static_cast<std::streamsize>(doubles),
            path + ": truncated payload");
    return out;
}

LoadedField load_field(const std::string& path, const Grid2D& expect) {
    LoadedField f = load_field(path);
    const Grid2D& g = f.complex_valued ? f.cplx.grid() : f.real.grid();
    require(g == expect,
            path + ": stored grid (n = " + std::to_string(g.n) +
                ", L = " + std::to_string(g.box_length) + ") does not match expected (n = " +
                std::to_string(expect.n) + ", L = " + std::to_string(expect.box_length) + ")");
    return f;
}

void save_snapshot(const KGState& s, const std::string& path) {
    require(s.u.grid() == s.ut.grid(), "state fields must share one grid");
    const Grid2D& g = s.u.grid();
    ComplexField2D packed(g, Space::physical);
    for (std::size_t i = 0; i < packed.size(); ++i) {
        packed.data()[i] = cplx(s.u.data()[i], s.ut.data()[i]);
    }
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot open " + path);
    write_header(out, Header{static_cast<std::uint32_t>(g.n), g.box_length, s.t, 1});
    write_payload(out, packed.data(), packed.size() * sizeof(cplx), path);

    const ConservedRecord c = conserved(s);
    nlohmann::json j;
    j["content"] = "kg-state";
    j["mu"] = s.mu;
    j["t"] = s.t;
    j["n"] = g.n;
    j["box_length"] = g.box_length;
    j["diagnostics"] = {{"energy", c.energy},
                        {"mass", c.mass},
                        {"p1", c.p[0]},
                        {"p2", c.p[1]},
                        {"sup", lp_norm(s.u, 0)}};
    write_meta(path, std::move(j));
}

KGState load_snapshot(const std::string& path) {
    LoadedField f = load_field(path);
    require(f.complex_valued, path + ": a state snapshot must be complex-kind");
    const nlohmann::json j = read_meta(path);
    require(j.value("content", "") == std::string("kg-state"),
            path + ": sidecar content is not kg-state");
    require(j.contains("mu"), path + ": sidecar lacks mu");
    const double mu = j["mu"].get<double>();

    const Grid2D& g = f.cplx.grid();
    RealField2D u(g), ut(g);
    for (std::size_t i = 0; i < f.cplx.size(); ++i) {
        u.data()[i] = f.cplx.data()[i].real();
        ut.data()[i] = f.cplx.data()[i].imag();
    }
    return KGState{std::move(u), std::move(ut), f.t, mu};
}

KGState load_snapshot(const std::string& path, const Grid2D& expect) {
    KGState s = load_snapshot(path);
    require(s.u.grid() == expect,
            path + ": stored grid does not match the expected grid");
    return s;
}

}  // namespace kg2d
