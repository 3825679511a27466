#include "res/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <sstream>

#include <json.hpp>

#include "res/textio.hpp"

namespace res {

namespace {

constexpr char kMagic[8] = {'R', 'E', 'S', 'C', 'K', 'P', 'T', '\n'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

void put_i32(std::string& out, std::int32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

void put_f64(std::string& out, double v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

void put_str(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

struct Cursor {
    const std::string& buf;
    std::size_t at = 0;

    void need(std::size_t n) const {
        require(at + n <= buf.size(), "checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v;
        std::memcpy(&v, buf.data() + at, 4);
        at += 4;
        return v;
    }
    std::int32_t i32() {
        need(4);
        std::int32_t v;
        std::memcpy(&v, buf.data() + at, 4);
        at += 4;
        return v;
    }
    double f64() {
        need(8);
        double v;
        std::memcpy(&v, buf.data() + at, 8);
        at += 8;
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(buf.data() + at, n);
        at += n;
        return s;
    }
};

std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace

std::string manifest_json(const System& system) {
    nlohmann::ordered_json j;
    j["system"] = system_name(system.kind());
    j["prefix_len"] = system.encoder().config().prefix_len;
    j["hidden"] = system.encoder().config().hidden;
    j["vocab_hash"] = hash_hex(system.tokenizer().vocab_hash());
    return j.dump(2) + "\n";
}

void save_checkpoint(const System& system, const std::string& path) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put_u32(out, kVersion);
    put_str(out, system_name(system.kind()));
    const EncoderConfig& cfg = system.encoder().config();
    put_i32(out, cfg.hidden);
    put_i32(out, cfg.layers);
    put_i32(out, cfg.heads);
    put_i32(out, cfg.max_positions);
    put_i32(out, cfg.prefix_len);
    put_i32(out, cfg.max_segment_len);
    put_i32(out, cfg.vocab_size);
    put_f64(out, cfg.dropout);
    put_f64(out, cfg.ln_eps);
    put_str(out, system.tokenizer().serialized());
    const auto params = system.named_parameters();
    put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, v] : params) {
        put_str(out, name);
        put_i32(out, v->val.rows);
        put_i32(out, v->val.cols);
        for (real x : v->val.a) put_f64(out, x);
    }
    write_file_atomic(path, out);
    write_file_atomic(path + ".manifest.json", manifest_json(system));
}

System load_checkpoint(const std::string& path) {
    const std::string buf = read_file(path);
    Cursor c{buf};
    c.need(sizeof(kMagic));
    require(std::memcmp(buf.data(), kMagic, sizeof(kMagic)) == 0,
            "checkpoint: bad magic in " + path);
    c.at = sizeof(kMagic);
    const std::uint32_t version = c.u32();
    require(version == kVersion, "checkpoint: unsupported version in " + path);
    const SystemKind kind = system_from_name(c.str());
    EncoderConfig cfg;
    cfg.hidden = c.i32();
    cfg.layers = c.i32();
    cfg.heads = c.i32();
    cfg.max_positions = c.i32();
    cfg.prefix_len = c.i32();
    cfg.max_segment_len = c.i32();
    cfg.vocab_size = c.i32();
    cfg.dropout = c.f64();
    cfg.ln_eps = c.f64();
    Tokenizer tok = Tokenizer::from_serialized(c.str());
    require(tok.vocab_size() == cfg.vocab_size, "checkpoint: vocabulary size mismatch");
    System system(kind, cfg, std::move(tok), 0);
    const auto params = system.named_parameters();
    const std::uint32_t n = c.u32();
    require(n == params.size(), "checkpoint: parameter count mismatch");
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::string name = c.str();
        require(name == params[i].first, "checkpoint: unexpected parameter " + name);
        const int rows = c.i32();
        const int cols = c.i32();
        Matrix& m = params[i].second->val;
        require(rows == m.rows && cols == m.cols, "checkpoint: shape mismatch for " + name);
        for (real& x : m.a) x = c.f64();
    }
    require(c.at == buf.size(), "checkpoint: trailing bytes in " + path);
    return system;
}

}  // namespace res
