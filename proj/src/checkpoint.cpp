#include "nlgcl/trainer.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace nlgcl {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'G', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int b = 0; b < 4; ++b) {
            buf_.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
        }
    }
    void u64(std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            buf_.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
        }
    }
    void i64(Index v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u64(s.size());
        buf_ += s;
    }
    void matrix(const Matrix& m) {
        i64(m.rows());
        i64(m.cols());
        for (Index k = 0; k < m.size(); ++k) {
            f64(m.data()[k]);
        }
    }
    void raw(std::string_view bytes) { buf_.append(bytes); }
    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(const char* data, std::size_t size, std::string context) : data_(data), size_(size), ctx_(std::move(context)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(*take(1)); }
    std::uint32_t u32() {
        const char* p = take(4);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
        }
        return v;
    }
    std::uint64_t u64() {
        const char* p = take(8);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
        }
        return v;
    }
    Index i64() { return static_cast<Index>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u64();
        return {take(n), static_cast<std::size_t>(n)};
    }
    Matrix matrix() {
        const Index rows = i64();
        const Index cols = i64();
        if (rows < 0 || cols < 0 || (cols > 0 && static_cast<std::uint64_t>(rows) > remaining() / 8 / static_cast<std::uint64_t>(cols))) {
            fail("matrix header " + std::to_string(rows) + "x" + std::to_string(cols) + " exceeds section size");
        }
        Matrix m(rows, cols);
        for (Index k = 0; k < m.size(); ++k) {
            m.data()[k] = f64();
        }
        return m;
    }
    const char* take(std::uint64_t n) {
        if (n > remaining()) {
            fail("truncated data");
        }
        const char* p = data_ + pos_;
        pos_ += static_cast<std::size_t>(n);
        return p;
    }
    std::uint64_t remaining() const { return size_ - pos_; }
    [[noreturn]] void fail(const std::string& what) const { throw CheckpointError("corrupt checkpoint " + ctx_ + ": " + what); }

private:
    const char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
    std::string ctx_;
};

void section(Writer& out, const char (&tag)[5], const Writer& payload) {
    out.raw(std::string_view(tag, 4));
    out.u64(payload.bytes().size());
    out.raw(payload.bytes());
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    Writer meta;
    meta.u64(ckpt.config_hash);
    meta.u64(ckpt.seed);
    meta.i64(ckpt.epoch);
    meta.str(ckpt.version);

    Writer dims;
    dims.i64(ckpt.state.user0.rows());
    dims.i64(ckpt.state.item0.rows());
    dims.i64(ckpt.state.dim());

    Writer embd;
    embd.matrix(ckpt.state.user0);
    embd.matrix(ckpt.state.item0);

    Writer adam;
    adam.u64(ckpt.adam.step_count);
    adam.f64(ckpt.adam.lr);
    adam.f64(ckpt.adam.beta1);
    adam.f64(ckpt.adam.beta2);
    adam.f64(ckpt.adam.eps);
    adam.matrix(ckpt.adam.m_user);
    adam.matrix(ckpt.adam.v_user);
    adam.matrix(ckpt.adam.m_item);
    adam.matrix(ckpt.adam.v_item);

    Writer stop;
    stop.f64(ckpt.early_stop.best_metric);
    stop.i64(ckpt.early_stop.best_epoch);
    stop.i64(ckpt.early_stop.epochs_since_improve);
    stop.u8(ckpt.early_stop.best_state ? 1 : 0);
    if (ckpt.early_stop.best_state) {
        stop.matrix(ckpt.early_stop.best_state->user0);
        stop.matrix(ckpt.early_stop.best_state->item0);
    }

    Writer hist;
    hist.u64(ckpt.history.size());
    for (const auto& rec : ckpt.history) {
        hist.i64(rec.epoch);
        for (double v : {rec.bpr, rec.nl_user, rec.nl_item, rec.reg, rec.total, rec.val_ndcg10, rec.seconds}) {
            hist.f64(v);
        }
    }

    Writer file;
    file.raw(std::string_view(kMagic, sizeof(kMagic)));
    file.u32(kFormatVersion);
    file.u32(6);
    section(file, "META", meta);
    section(file, "DIMS", dims);
    section(file, "EMBD", embd);
    section(file, "ADAM", adam);
    section(file, "STOP", stop);
    section(file, "HIST", hist);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write checkpoint " + path.string());
    }
    out.write(file.bytes().data(), static_cast<std::streamsize>(file.bytes().size()));
    if (!out) {
        throw DataError("write failure on checkpoint " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open checkpoint " + path.string());
    }
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    Reader file(bytes.data(), bytes.size(), path.string());
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw CheckpointError("not a checkpoint (bad magic): " + path.string());
    }
    file.take(sizeof(kMagic));
    const auto version = file.u32();
    if (version != kFormatVersion) {
        file.fail("unsupported format version " + std::to_string(version));
    }
    const auto count = file.u32();
    std::map<std::string, std::pair<const char*, std::size_t>> sections;
    for (std::uint32_t s = 0; s < count; ++s) {
        std::string tag(file.take(4), 4);
        const auto len = file.u64();
        const char* payload = file.take(len);
        sections[tag] = {payload, static_cast<std::size_t>(len)};
    }
    if (file.remaining() != 0) {
        file.fail("trailing bytes after last section");
    }
    auto open = [&](const std::string& tag) {
        const auto it = sections.find(tag);
        if (it == sections.end()) {
            file.fail("missing section " + tag);
        }
        return Reader(it->second.first, it->second.second, path.string() + " [" + tag + "]");
    };

    Checkpoint ckpt;
    {
        auto r = open("META");
        ckpt.config_hash = r.u64();
        ckpt.seed = r.u64();
        ckpt.epoch = r.i64();
        ckpt.version = r.str();
    }
    Index num_users = 0;
    Index num_items = 0;
    Index dim = 0;
    {
        auto r = open("DIMS");
        num_users = r.i64();
        num_items = r.i64();
        dim = r.i64();
    }
    auto check_shape = [&](const Matrix& m, Index rows, const char* what) {
        if (m.rows() != rows || m.cols() != dim) {
            file.fail(std::string(what) + " shape disagrees with DIMS");
        }
    };
    {
        auto r = open("EMBD");
        ckpt.state.user0 = r.matrix();
        ckpt.state.item0 = r.matrix();
        check_shape(ckpt.state.user0, num_users, "user embedding");
        check_shape(ckpt.state.item0, num_items, "item embedding");
    }
    {
        auto r = open("ADAM");
        ckpt.adam.step_count = r.u64();
        ckpt.adam.lr = r.f64();
        ckpt.adam.beta1 = r.f64();
        ckpt.adam.beta2 = r.f64();
        ckpt.adam.eps = r.f64();
        ckpt.adam.m_user = r.matrix();
        ckpt.adam.v_user = r.matrix();
        ckpt.adam.m_item = r.matrix();
        ckpt.adam.v_item = r.matrix();
        check_shape(ckpt.adam.m_user, num_users, "adam m_user");
        check_shape(ckpt.adam.v_user, num_users, "adam v_user");
        check_shape(ckpt.adam.m_item, num_items, "adam m_item");
        check_shape(ckpt.adam.v_item, num_items, "adam v_item");
    }
    {
        auto r = open("STOP");
        ckpt.early_stop.best_metric = r.f64();
        ckpt.early_stop.best_epoch = r.i64();
        ckpt.early_stop.epochs_since_improve = r.i64();
        if (r.u8() != 0) {
            EmbeddingState best;
            best.user0 = r.matrix();
            best.item0 = r.matrix();
            check_shape(best.user0, num_users, "best user embedding");
            check_shape(best.item0, num_items, "best item embedding");
            ckpt.early_stop.best_state = std::move(best);
        }
    }
    {
        auto r = open("HIST");
        const auto n = r.u64();
        if (n > r.remaining() / 64) {
            r.fail("history length exceeds section size");
        }
        for (std::uint64_t k = 0; k < n; ++k) {
            EpochRecord rec;
            rec.epoch = r.i64();
            rec.bpr = r.f64();
            rec.nl_user = r.f64();
            rec.nl_item = r.f64();
            rec.reg = r.f64();
            rec.total = r.f64();
            rec.val_ndcg10 = r.f64();
            rec.seconds = r.f64();
            ckpt.history.push_back(rec);
        }
    }
    return ckpt;
}

}  // namespace nlgcl
