#include "rqif/streamio.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "rqif/numerics.hpp"

namespace rqif {

namespace {

constexpr char kMagic[4] = {'R', 'N', 'Q', 'F'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer {
public:
    template <typename T>
    void put(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void put_vector(const Eigen::VectorXd& v) {
        put<std::int64_t>(v.size());
        buf_.append(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
    }
    void put_matrix(const Eigen::MatrixXd& m) {
        put<std::int64_t>(m.rows());
        put<std::int64_t>(m.cols());
        // row-major on disk
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(m(i, j));
    }
    const std::string& data() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(const std::string& data, std::size_t pos) : data_(data), pos_(pos) {}

    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        if (pos_ + sizeof(T) > data_.size()) throw std::runtime_error("state file truncated");
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    Eigen::VectorXd get_vector() {
        const auto n = get<std::int64_t>();
        if (n < 0 || pos_ + sizeof(double) * n > data_.size())
            throw std::runtime_error("state file truncated");
        Eigen::VectorXd v(n);
        std::memcpy(v.data(), data_.data() + pos_, sizeof(double) * n);
        pos_ += sizeof(double) * n;
        return v;
    }
    Eigen::MatrixXd get_matrix() {
        const auto r = get<std::int64_t>();
        const auto c = get<std::int64_t>();
        if (r < 0 || c < 0) throw std::runtime_error("state file corrupt");
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = get<double>();
        return m;
    }

private:
    const std::string& data_;
    std::size_t pos_;
};

void write_atomic(const std::string& path, const std::string& payload) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

void put_batch(Writer& w, const ClusterBatch& batch) {
    w.put<std::int64_t>(batch.batch_id);
    w.put<std::int64_t>(batch.size());
    for (const Cluster& c : batch.clusters) {
        w.put_vector(c.y);
        w.put_matrix(c.X);
    }
}

ClusterBatch get_batch(Reader& r) {
    ClusterBatch batch;
    batch.batch_id = r.get<std::int64_t>();
    const auto n = r.get<std::int64_t>();
    batch.clusters.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
        Cluster c;
        c.y = r.get_vector();
        c.X = r.get_matrix();
        batch.clusters.push_back(std::move(c));
    }
    return batch;
}

}  // namespace

ClusterBatch read_batch_file(const std::string& path, long batch_id) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open batch file: " + path);

    ClusterBatch batch;
    batch.batch_id = batch_id;
    std::string line;
    long line_no = 0;

    if (!std::getline(in, line)) throw ParseError("empty batch file", 1);
    ++line_no;
    // header: cluster_id,y,x1,...,xp
    int p = -1;
    {
        std::stringstream ss(line);
        std::string tok;
        int cols = 0;
        while (std::getline(ss, tok, ',')) ++cols;
        if (cols < 3) throw ParseError("header must be cluster_id,y,x1,...,xp", line_no);
        p = cols - 2;
    }

    std::string current_id;
    std::vector<double> ys;
    std::vector<double> xs;
    std::unordered_set<std::string> seen_ids;
    auto flush = [&]() {
        if (ys.empty()) return;
        Cluster c;
        const long m = static_cast<long>(ys.size());
        c.y = Eigen::Map<Eigen::VectorXd>(ys.data(), m);
        c.X = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            xs.data(), m, p);
        batch.clusters.push_back(std::move(c));
        ys.clear();
        xs.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        if (!std::getline(ss, tok, ',')) throw ParseError("missing cluster_id", line_no);
        const std::string id = tok;
        if (id != current_id) {
            if (!seen_ids.insert(id).second)
                throw ParseError("cluster_id blocks must be contiguous: " + id, line_no);
            flush();
            current_id = id;
        }
        int col = 0;
        try {
            while (std::getline(ss, tok, ',')) {
                const double v = std::stod(tok);
                if (col == 0) ys.push_back(v); else xs.push_back(v);
                ++col;
            }
        } catch (const std::exception&) {
            throw ParseError("non-numeric field", line_no);
        }
        if (col != p + 1) throw ParseError("expected " + std::to_string(p + 2) + " columns", line_no);
    }
    flush();
    return batch;
}

void write_batch_file(const ClusterBatch& batch, int p, const std::string& path) {
    std::ostringstream out;
    out.precision(17);
    out << "cluster_id,y";
    for (int k = 1; k <= p; ++k) out << ",x" << k;
    out << "\n";
    long id = 0;
    for (const Cluster& c : batch.clusters) {
        ++id;
        for (Eigen::Index j = 0; j < c.y.size(); ++j) {
            out << id << ',' << c.y[j];
            for (int k = 0; k < p; ++k) out << ',' << c.X(j, k);
            out << "\n";
        }
    }
    write_atomic(path, out.str());
}

void save_state(const RenewState& state, const std::string& path, const GeeState* gee) {
    if (!state.beta.allFinite() || !state.g.allFinite() || !state.G.allFinite() ||
        !state.C.allFinite())
        throw std::runtime_error("save_state: non-finite state");

    Writer w;
    w.put(kMagic);
    w.put<std::uint32_t>(kVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(state.model.family));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(state.model.corr));
    w.put<std::int32_t>(state.model.p);
    w.put<std::int32_t>(state.model.basis_count());

    w.put<std::int64_t>(state.b);
    w.put<std::int64_t>(state.N);
    w.put<std::int64_t>(state.reference.size());
    w.put<std::int64_t>(state.batches_rejected);
    w.put<double>(state.config.monitor_alpha);
    w.put<double>(state.config.tol);
    w.put<std::int32_t>(state.config.maxit);
    w.put<std::uint8_t>(state.config.monitor ? 1 : 0);
    w.put<std::uint8_t>(state.last_converged ? 1 : 0);
    w.put<std::int32_t>(state.last_iterations);

    w.put_vector(state.beta);
    w.put_vector(state.g);
    w.put_matrix(state.G);
    w.put_matrix(state.C);

    w.put<std::uint8_t>(gee ? 1 : 0);
    if (gee) {
        w.put_vector(gee->beta);
        w.put_matrix(gee->S);
        w.put_matrix(gee->V);
        w.put<double>(gee->nuisance.alpha);
        w.put<double>(gee->nuisance.phi);
        w.put<std::uint8_t>(gee->nuisance.alpha_clamped ? 1 : 0);
        w.put<std::int64_t>(gee->N);
        w.put<std::int64_t>(gee->b);
        w.put<double>(gee->m_avg);
        w.put<double>(gee->tol);
        w.put<std::int32_t>(gee->maxit);
        w.put<std::uint8_t>(gee->last_converged ? 1 : 0);
        w.put<std::int32_t>(gee->last_iterations);
    }

    put_batch(w, state.reference);

    std::string payload = w.data();
    const std::uint64_t checksum = fnv1a(payload);
    payload.append(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
    write_atomic(path, payload);
}

LoadedState load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open state file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t))
        throw std::runtime_error("state file truncated");
    if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a state file (bad magic)");

    std::uint64_t stored;
    std::memcpy(&stored, data.data() + data.size() - sizeof(stored), sizeof(stored));
    const std::string payload = data.substr(0, data.size() - sizeof(stored));
    if (fnv1a(payload) != stored)
        throw std::runtime_error("state file checksum mismatch (corrupt or truncated)");

    Reader r(payload, sizeof(kMagic));
    const auto version = r.get<std::uint32_t>();
    if (version != kVersion)
        throw StateVersionError("unsupported state format_version " + std::to_string(version));

    LoadedState out;
    RenewState& st = out.renew;
    st.model.family = static_cast<Family>(r.get<std::uint8_t>());
    st.model.corr = static_cast<Corr>(r.get<std::uint8_t>());
    st.model.p = r.get<std::int32_t>();
    const auto s_stored = r.get<std::int32_t>();
    if (s_stored != st.model.basis_count()) throw std::runtime_error("state file corrupt (S)");

    st.b = r.get<std::int64_t>();
    st.N = r.get<std::int64_t>();
    r.get<std::int64_t>();  // n1, recoverable from the reference section
    st.batches_rejected = r.get<std::int64_t>();
    st.config.monitor_alpha = r.get<double>();
    st.config.tol = r.get<double>();
    st.config.maxit = r.get<std::int32_t>();
    st.config.monitor = r.get<std::uint8_t>() != 0;
    st.last_converged = r.get<std::uint8_t>() != 0;
    st.last_iterations = r.get<std::int32_t>();

    st.beta = r.get_vector();
    st.g = r.get_vector();
    st.G = r.get_matrix();
    st.C = r.get_matrix();

    if (r.get<std::uint8_t>()) {
        GeeState gs;
        gs.model = st.model;
        gs.beta = r.get_vector();
        gs.S = r.get_matrix();
        gs.V = r.get_matrix();
        gs.nuisance.alpha = r.get<double>();
        gs.nuisance.phi = r.get<double>();
        gs.nuisance.alpha_clamped = r.get<std::uint8_t>() != 0;
        gs.N = r.get<std::int64_t>();
        gs.b = r.get<std::int64_t>();
        gs.m_avg = r.get<double>();
        gs.tol = r.get<double>();
        gs.maxit = r.get<std::int32_t>();
        gs.last_converged = r.get<std::uint8_t>() != 0;
        gs.last_iterations = r.get<std::int32_t>();
        out.gee = std::move(gs);
    }

    st.reference = get_batch(r);

    // Loaded aggregates must still be PSD within floating tolerance.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (st.C + st.C.transpose()));
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lmax > 0 && es.eigenvalues().minCoeff() < -1e-8 * lmax)
        throw std::runtime_error("state file invalid: aggregated variance is not PSD");
    return out;
}

}  // namespace rqif
