#pragma once

// File formats. All reals are written with 17 significant digits so every
// double round-trips exactly.
//
// Instance file (text, whitespace separated, version line first):
//
//   proxsplit-instance 1
//   n <n>
//   seed <seed>
//   eigen_shift <shift>
//   lower <n reals>
//   upper <n reals>
//   components <N>
//   component <modulus> <beta_min> <pieces>
//   piece negquad <coord> | piece linlog <coord> | piece quadform <d> <d coords> <d*d reals, row major>
//   end
//
// Trace CSV:   k,step_norm,f_value,dist_to_oracle,elapsed_ms
// Summary CSV: method,n,epsilon,runs,avg_iterations,avg_cpu_ms
//
// Timing columns are left empty in the main files unless inline timings are
// requested; the values go to a `<file>.timing.csv` sidecar so the main files
// are byte-reproducible.

#include "proxsplit/core.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxsplit {

/// Raised for unreadable or unwritable files; carries the path.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::filesystem::path path)
        : std::runtime_error(what + ": " + path.string()), path_(std::move(path)) {}
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Short form for file names and tables, e.g. 1e-10.
inline std::string format_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct InstanceMeta {
    std::uint64_t seed = 0;
    double eigen_shift = 0.0;
};

inline constexpr int kInstanceFormatVersion = 1;

inline std::string serialize_instance(const Problem& p, const InstanceMeta& meta) {
    std::ostringstream os;
    const auto write_vec = [&](const char* key, const Vector& v) {
        os << key;
        for (Index i = 0; i < v.size(); ++i) os << ' ' << format_real(v[i]);
        os << '\n';
    };
    os << "proxsplit-instance " << kInstanceFormatVersion << '\n';
    os << "n " << p.dim() << '\n';
    os << "seed " << meta.seed << '\n';
    os << "eigen_shift " << format_real(meta.eigen_shift) << '\n';
    write_vec("lower", p.box().lower());
    write_vec("upper", p.box().upper());
    os << "components " << p.size() << '\n';
    for (const auto& c : p.components()) {
        os << "component " << format_real(c.modulus()) << ' ' << format_real(c.beta_min()) << ' ' << c.pieces().size()
           << '\n';
        for (const auto& piece : c.pieces()) {
            os << "piece " << to_string(piece.kind());
            if (piece.kind() != PieceKind::QuadForm) {
                os << ' ' << piece.coords().front() << '\n';
                continue;
            }
            const auto& cs = piece.coords();
            os << ' ' << cs.size();
            for (const Index i : cs) os << ' ' << i;
            os << '\n';
            const Matrix& m = piece.matrix();
            for (Index i = 0; i < m.rows(); ++i) {
                for (Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_real(m(i, j));
                os << '\n';
            }
        }
    }
    os << "end\n";
    return os.str();
}

struct LoadedInstance {
    Problem problem;
    InstanceMeta meta;
};

inline LoadedInstance parse_instance(std::istream& in) {
    const auto fail = [](const std::string& what) -> void { throw std::invalid_argument("instance file: " + what); };
    const auto expect = [&](const char* key) {
        std::string tok;
        if (!(in >> tok) || tok != key) fail(std::string("expected '") + key + "'");
    };
    const auto read_vec = [&](Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i)
            if (!(in >> v[i])) fail("truncated vector");
        return v;
    };

    int version = 0;
    expect("proxsplit-instance");
    if (!(in >> version) || version != kInstanceFormatVersion) fail("unsupported format version");
    Index n = 0;
    InstanceMeta meta;
    expect("n");
    if (!(in >> n) || n < 1) fail("bad dimension");
    expect("seed");
    if (!(in >> meta.seed)) fail("bad seed");
    expect("eigen_shift");
    if (!(in >> meta.eigen_shift)) fail("bad eigen_shift");
    expect("lower");
    Vector lo = read_vec(n);
    expect("upper");
    Vector hi = read_vec(n);
    std::size_t ncomp = 0;
    expect("components");
    if (!(in >> ncomp) || ncomp < 1) fail("bad component count");

    std::vector<Component> comps;
    for (std::size_t c = 0; c < ncomp; ++c) {
        double modulus = 0.0, beta_min = 0.0;
        std::size_t npieces = 0;
        expect("component");
        if (!(in >> modulus >> beta_min >> npieces)) fail("bad component header");
        std::vector<BlockPiece> pieces;
        for (std::size_t k = 0; k < npieces; ++k) {
            std::string kind;
            expect("piece");
            if (!(in >> kind)) fail("missing piece kind");
            if (kind == "negquad" || kind == "linlog") {
                Index coord = 0;
                if (!(in >> coord)) fail("bad piece coordinate");
                pieces.push_back(kind == "negquad" ? BlockPiece::negquad(coord) : BlockPiece::linlog(coord));
            } else if (kind == "quadform") {
                std::size_t d = 0;
                if (!(in >> d) || d < 1) fail("bad quadform size");
                std::vector<Index> coords(d);
                for (auto& i : coords)
                    if (!(in >> i)) fail("bad quadform coordinates");
                Matrix m(static_cast<Index>(d), static_cast<Index>(d));
                for (Index i = 0; i < m.rows(); ++i)
                    for (Index j = 0; j < m.cols(); ++j)
                        if (!(in >> m(i, j))) fail("truncated matrix");
                pieces.push_back(BlockPiece::quadform(std::move(coords), std::move(m)));
            } else {
                fail("unknown piece kind '" + kind + "'");
            }
        }
        comps.emplace_back(std::move(pieces), modulus, beta_min);
    }
    expect("end");
    return LoadedInstance{Problem(Box(std::move(lo), std::move(hi)), std::move(comps)), meta};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& body) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing", path);
    out << body;
    out.flush();
    if (!out) throw IoError("write failed", path);
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading", path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void save_instance(const std::filesystem::path& path, const Problem& p, const InstanceMeta& meta) {
    write_text_file(path, serialize_instance(p, meta));
}

inline LoadedInstance load_instance(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    return parse_instance(in);
}

enum class TimingMode { Sidecar, Inline };

inline std::string trace_csv(const Trace& t, std::size_t count, TimingMode timing) {
    std::string s = "k,step_norm,f_value,dist_to_oracle,elapsed_ms\n";
    for (std::size_t i = 0; i < count && i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        s += std::to_string(r.k);
        s += ',';
        s += format_real(r.step_norm);
        s += ',';
        s += format_real(r.f_value);
        s += ',';
        if (r.dist_to_oracle) s += format_real(*r.dist_to_oracle);
        s += ',';
        if (timing == TimingMode::Inline) s += format_real(r.elapsed_ms);
        s += '\n';
    }
    return s;
}

inline std::string trace_timing_csv(const Trace& t, std::size_t count) {
    std::string s = "k,elapsed_ms\n";
    for (std::size_t i = 0; i < count && i < t.records.size(); ++i)
        s += std::to_string(t.records[i].k) + ',' + format_real(t.records[i].elapsed_ms) + '\n';
    return s;
}

/// Writes the first `count` records; with sidecar timings also writes
/// `<path>.timing.csv`.
inline void write_trace(const std::filesystem::path& path, const Trace& t, std::size_t count, TimingMode timing) {
    write_text_file(path, trace_csv(t, count, timing));
    if (timing == TimingMode::Sidecar) write_text_file(path.string() + ".timing.csv", trace_timing_csv(t, count));
}

inline void write_trace(const std::filesystem::path& path, const Trace& t, TimingMode timing) {
    write_trace(path, t, t.records.size(), timing);
}

struct SummaryRow {
    Method method = Method::Cyclic;
    Index n = 0;
    double epsilon = 0.0;
    std::size_t runs = 0;
    double avg_iterations = 0.0;
    double avg_cpu_ms = 0.0;
};

inline std::string summary_csv(const std::vector<SummaryRow>& rows, TimingMode timing) {
    std::string s = "method,n,epsilon,runs,avg_iterations,avg_cpu_ms\n";
    for (const auto& r : rows) {
        s += std::string(to_string(r.method)) + ',' + std::to_string(r.n) + ',' + format_real(r.epsilon) + ',' +
             std::to_string(r.runs) + ',' + format_real(r.avg_iterations) + ',';
        if (timing == TimingMode::Inline) s += format_real(r.avg_cpu_ms);
        s += '\n';
    }
    return s;
}

inline std::string summary_timing_csv(const std::vector<SummaryRow>& rows) {
    std::string s = "method,n,epsilon,avg_cpu_ms\n";
    for (const auto& r : rows)
        s += std::string(to_string(r.method)) + ',' + std::to_string(r.n) + ',' + format_real(r.epsilon) + ',' +
             format_real(r.avg_cpu_ms) + '\n';
    return s;
}

inline void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows, TimingMode timing) {
    write_text_file(path, summary_csv(rows, timing));
    if (timing == TimingMode::Sidecar) write_text_file(path.string() + ".timing.csv", summary_timing_csv(rows));
}

}  // namespace proxsplit
