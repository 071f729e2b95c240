#include "deepboost/model_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace deepboost {

namespace {

constexpr char kMagic[8] = {'D', 'P', 'B', 'O', 'O', 'S', 'T', '1'};
constexpr std::uint32_t kTagConfig = 0x464E4F43;  // "CONF"
constexpr std::uint32_t kTagClass = 0x53414C43;   // "CLAS"

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }
    void bytes(const std::vector<unsigned char>& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    std::vector<unsigned char>& data() { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    Reader(const unsigned char* p, std::size_t n) : p_(p), n_(n) {}

    void need(std::size_t k) const {
        if (pos_ + k > n_) throw TruncatedModelError("model file truncated at byte " + std::to_string(pos_));
    }
    std::uint8_t u8() {
        need(1);
        return p_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p_[pos_++]) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(p_ + pos_), n);
        pos_ += n;
        return s;
    }
    /// Element count that must be backed by at least `min_bytes_each` bytes per element.
    std::size_t count(std::size_t min_bytes_each) {
        const std::uint64_t n = u64();
        if (min_bytes_each && n > (n_ - pos_) / min_bytes_each)
            throw TruncatedModelError("model file truncated: count " + std::to_string(n) + " exceeds payload");
        return static_cast<std::size_t>(n);
    }
    const unsigned char* here() const { return p_ + pos_; }
    void skip(std::size_t k) {
        need(k);
        pos_ += k;
    }
    bool done() const { return pos_ == n_; }

private:
    const unsigned char* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

std::uint32_t crc(const unsigned char* p, std::size_t n) {
    return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), p, static_cast<uInt>(n)));
}

void write_matrix(Writer& w, const Matrix& m) {
    w.i32(m.rows());
    w.i32(m.cols());
    for (double v : m.values()) w.f64(v);
}

Matrix read_matrix(Reader& r) {
    const int rows = r.i32();
    const int cols = r.i32();
    if (rows < 0 || cols < 0) throw ModelFileError("negative matrix dimension in model file");
    r.need(static_cast<std::size_t>(rows) * cols * 8);
    std::vector<double> v(static_cast<std::size_t>(rows) * cols);
    for (double& x : v) x = r.f64();
    return Matrix(rows, cols, std::move(v));
}

void write_config(Writer& w, const DeepBoostConfig& c) {
    w.i32(c.layers);
    w.u64(c.rounds.size());
    for (int r : c.rounds) w.i32(r);
    w.f64(c.joint.lambda);
    w.f64(c.joint.eta);
    w.i32(c.joint.grad_steps);
    w.i32(c.joint.outer_iters);
    w.f64(c.joint.tol);
    w.i32(c.joint.bins);
    w.i32(c.joint.backtrack_halvings);
    w.i32(c.gabor.orientations);
    w.i32(c.gabor.scales);
    w.i32(c.gabor.size);
    w.f64(c.gabor.wavelength);
    w.f64(c.gabor.sigma);
    w.f64(c.compression_threshold);
    w.u8(c.compress ? 1 : 0);
    w.u8(c.compose_mode == ComposeMode::raw ? 1 : 0);
    w.u64(c.seed);
    w.i32(c.target_size);
}

DeepBoostConfig read_config(Reader& r) {
    DeepBoostConfig c;
    c.layers = r.i32();
    c.rounds.resize(r.count(4));
    for (int& x : c.rounds) x = r.i32();
    c.joint.lambda = r.f64();
    c.joint.eta = r.f64();
    c.joint.grad_steps = r.i32();
    c.joint.outer_iters = r.i32();
    c.joint.tol = r.f64();
    c.joint.bins = r.i32();
    c.joint.backtrack_halvings = r.i32();
    c.gabor.orientations = r.i32();
    c.gabor.scales = r.i32();
    c.gabor.size = r.i32();
    c.gabor.wavelength = r.f64();
    c.gabor.sigma = r.f64();
    c.compression_threshold = r.f64();
    c.compress = r.u8() != 0;
    c.compose_mode = r.u8() ? ComposeMode::raw : ComposeMode::normalized;
    c.seed = r.u64();
    c.target_size = r.i32();
    return c;
}

void write_layer(Writer& w, const LayerModel& l) {
    w.u8(l.normalize_responses ? 1 : 0);
    w.u8(l.stalled ? 1 : 0);
    const auto& d = l.dictionary;
    w.i32(d.layer);
    w.i32(d.class_id);
    w.u64(d.filters.size());
    for (const auto& f : d.filters) {
        w.i32(f.id);
        w.i32(f.layer);
        w.u8(f.lineage ? 1 : 0);
        w.i32(f.lineage ? f.lineage->first : 0);
        w.i32(f.lineage ? f.lineage->second : 0);
        write_matrix(w, f.kernel);
    }
    w.i32(l.layout.filters);
    w.i32(l.layout.bins);
    w.u64(l.layout.bin_edges.size());
    for (double e : l.layout.bin_edges) w.f64(e);
    w.i32(l.classifier.rounds);
    w.u64(l.classifier.stumps.size());
    for (const auto& s : l.classifier.stumps) {
        w.u64(s.dim);
        w.f64(s.threshold);
        w.f64(s.a);
        w.f64(s.b);
        w.u8(s.indicator ? 1 : 0);
    }
    w.u64(l.selected_ids.size());
    for (int id : l.selected_ids) w.i32(id);
    w.u64(l.trace.size());
    for (const auto& t : l.trace) {
        w.i32(t.iteration);
        w.f64(t.empirical);
        w.f64(t.regularizer);
        w.f64(t.total);
        w.i32(t.boosting_rounds);
        w.f64(t.train_error);
    }
    w.u64(l.placements.size());
    for (const auto& p : l.placements) {
        w.i32(p.filter_id);
        w.i32(p.w);
        w.i32(p.h);
    }
}

LayerModel read_layer(Reader& r) {
    LayerModel l;
    l.normalize_responses = r.u8() != 0;
    l.stalled = r.u8() != 0;
    auto& d = l.dictionary;
    d.layer = r.i32();
    d.class_id = r.i32();
    d.filters.resize(r.count(21));
    for (auto& f : d.filters) {
        f.id = r.i32();
        f.layer = r.i32();
        const bool has = r.u8() != 0;
        const int a = r.i32();
        const int b = r.i32();
        if (has) f.lineage = std::make_pair(a, b);
        f.kernel = read_matrix(r);
    }
    l.layout.filters = r.i32();
    l.layout.bins = r.i32();
    l.layout.bin_edges.resize(r.count(8));
    for (double& e : l.layout.bin_edges) e = r.f64();
    l.classifier.rounds = r.i32();
    l.classifier.stumps.resize(r.count(33));
    for (auto& s : l.classifier.stumps) {
        s.dim = r.u64();
        s.threshold = r.f64();
        s.a = r.f64();
        s.b = r.f64();
        s.indicator = r.u8() != 0;
    }
    l.selected_ids.resize(r.count(4));
    for (int& id : l.selected_ids) id = r.i32();
    l.trace.resize(r.count(40));
    for (auto& t : l.trace) {
        t.iteration = r.i32();
        t.empirical = r.f64();
        t.regularizer = r.f64();
        t.total = r.f64();
        t.boosting_rounds = r.i32();
        t.train_error = r.f64();
    }
    l.placements.resize(r.count(12));
    for (auto& p : l.placements) {
        p.filter_id = r.i32();
        p.w = r.i32();
        p.h = r.i32();
    }
    if (l.layout.filters != static_cast<int>(d.filters.size()))
        throw ModelFileError("layer layout does not match its dictionary");
    for (const auto& s : l.classifier.stumps)
        if (s.dim >= l.layout.dim()) throw ModelFileError("stump dimension outside the feature layout");
    return l;
}

void write_section(Writer& out, std::uint32_t tag, Writer& payload) {
    out.u32(tag);
    out.u64(payload.data().size());
    out.bytes(payload.data());
    out.u32(crc(payload.data().data(), payload.data().size()));
}

}  // namespace

std::vector<unsigned char> serialize_model(const DeepBoostModel& model) {
    Writer out;
    for (char c : kMagic) out.u8(static_cast<std::uint8_t>(c));
    out.u32(DeepBoostModel::kFormatVersion);
    out.u32(static_cast<std::uint32_t>(1 + model.class_models.size()));

    Writer conf;
    write_config(conf, model.config);
    conf.u64(model.class_names.size());
    for (const auto& n : model.class_names) conf.str(n);
    write_section(out, kTagConfig, conf);

    for (const auto& cm : model.class_models) {
        Writer cls;
        cls.i32(cm.class_id);
        cls.u64(cm.layers.size());
        for (const auto& l : cm.layers) write_layer(cls, l);
        write_section(out, kTagClass, cls);
    }
    return std::move(out.data());
}

DeepBoostModel deserialize_model(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < sizeof(kMagic)) throw TruncatedModelError("model file shorter than its magic header");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw BadMagicError("not a DPBOOST1 model file");
    Reader r(bytes.data() + sizeof(kMagic), bytes.size() - sizeof(kMagic));
    const std::uint32_t version = r.u32();
    if (version != DeepBoostModel::kFormatVersion)
        throw VersionMismatchError("model format version " + std::to_string(version) + ", expected " +
                                   std::to_string(DeepBoostModel::kFormatVersion));
    const std::uint32_t sections = r.u32();
    DeepBoostModel model;
    bool have_config = false;
    for (std::uint32_t s = 0; s < sections; ++s) {
        const std::uint32_t tag = r.u32();
        const std::uint64_t len = r.u64();
        r.need(len + 4);
        const unsigned char* payload = r.here();
        r.skip(len);
        const std::uint32_t stored = r.u32();
        if (crc(payload, len) != stored) throw ChecksumError("checksum mismatch in section " + std::to_string(s));
        Reader pr(payload, len);
        if (tag == kTagConfig) {
            model.config = read_config(pr);
            model.class_names.resize(pr.count(4));
            for (auto& n : model.class_names) n = pr.str();
            have_config = true;
        } else if (tag == kTagClass) {
            if (!have_config) throw ModelFileError("class section before config section");
            ClassModel cm;
            cm.class_id = pr.i32();
            cm.layers.resize(pr.count(1));
            for (auto& l : cm.layers) l = read_layer(pr);
            model.class_models.push_back(std::move(cm));
        } else {
            throw ModelFileError("unknown section tag " + std::to_string(tag));
        }
        if (!pr.done()) throw ModelFileError("trailing bytes in section " + std::to_string(s));
    }
    if (!have_config) throw ModelFileError("model file has no config section");
    if (!r.done()) throw ModelFileError("trailing bytes after the last section");
    if (model.class_models.size() != model.class_names.size())
        throw ModelFileError("model has " + std::to_string(model.class_models.size()) + " class sections for " +
                             std::to_string(model.class_names.size()) + " class names");
    return model;
}

void save_model(const DeepBoostModel& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing model file " + path.string());
}

DeepBoostModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace deepboost
