#include "dgdmn/checkpoint.hpp"

#include "dgdmn/errors.hpp"

#include <cstring>
#include <fstream>

namespace dgdmn {

namespace {
constexpr char kMagic[4] = {'D', 'G', 'D', 'M'};
}

void ByteWriter::u8(std::uint8_t v) { bytes_.push_back(v); }
void ByteWriter::u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::f32(double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, 4);
    u32(bits);
}
void ByteWriter::str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
}
void ByteWriter::raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
}

void ByteReader::need(std::size_t n) const {
    if (pos_ + n > size_) throw CheckpointError("truncated checkpoint data");
}
std::uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}
std::uint16_t ByteReader::u16() {
    need(2);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(data_[pos_++]) << (8 * i);
    return v;
}
std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
}
std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
}
double ByteReader::f32() {
    const std::uint32_t bits = u32();
    float f = 0.0f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
}
std::string ByteReader::str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
}
void ByteReader::raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_ + pos_, n);
    pos_ += n;
}

// --- typed payloads -----------------------------------------------------------

void write_tensor(ByteWriter& w, const Tensor& t) {
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.u64(d);
    for (double v : t.values()) w.f32(v);
}

Tensor read_tensor(ByteReader& r) {
    const std::uint32_t rank = r.u32();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.u64());
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = r.f32();
    return t;
}

void write_params(ByteWriter& w, const num::ParamSet& p) {
    w.u32(static_cast<std::uint32_t>(p.size()));
    for (const auto& [name, t] : p) {
        w.str(name);
        write_tensor(w, t);
    }
}

num::ParamSet read_params(ByteReader& r) {
    const std::uint32_t n = r.u32();
    num::ParamSet p;
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string name = r.str();
        p.emplace(std::move(name), read_tensor(r));
    }
    return p;
}

namespace {

void write_dims(ByteWriter& w, const std::vector<std::size_t>& dims) {
    w.u32(static_cast<std::uint32_t>(dims.size()));
    for (std::size_t d : dims) w.u64(d);
}

std::vector<std::size_t> read_dims(ByteReader& r) {
    std::vector<std::size_t> dims(r.u32());
    for (auto& d : dims) d = static_cast<std::size_t>(r.u64());
    return dims;
}

void write_dict(ByteWriter& w, const TaskDictionary& d) {
    w.u32(static_cast<std::uint32_t>(d.size()));
    for (const auto& [task, count] : d) {
        w.str(task.id);
        w.u64(count);
    }
}

TaskDictionary read_dict(ByteReader& r) {
    const std::uint32_t n = r.u32();
    TaskDictionary d;
    for (std::uint32_t i = 0; i < n; ++i) {
        TaskDescriptor t{r.str()};
        d[t] = r.u64();
    }
    return d;
}

void write_mlp_spec(ByteWriter& w, const num::MlpSpec& s) {
    w.u32(static_cast<std::uint32_t>(s.layers.size()));
    for (const auto& l : s.layers) {
        w.u64(l.in);
        w.u64(l.out);
        w.u8(static_cast<std::uint8_t>(l.act));
    }
}

num::MlpSpec read_mlp_spec(ByteReader& r) {
    num::MlpSpec s;
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        num::LayerSpec l;
        l.in = static_cast<std::size_t>(r.u64());
        l.out = static_cast<std::size_t>(r.u64());
        l.act = static_cast<num::Activation>(r.u8());
        s.layers.push_back(l);
    }
    return s;
}

void write_vae(ByteWriter& w, const VaeParams& v) {
    w.u64(v.spec.input);
    write_dims(w, v.spec.enc_hidden);
    w.u64(v.spec.latent);
    write_dims(w, v.spec.dec_hidden);
    write_params(w, v.params);
}

VaeParams read_vae(ByteReader& r) {
    VaeParams v;
    v.spec.input = static_cast<std::size_t>(r.u64());
    v.spec.enc_hidden = read_dims(r);
    v.spec.latent = static_cast<std::size_t>(r.u64());
    v.spec.dec_hidden = read_dims(r);
    v.params = read_params(r);
    return v;
}

} // namespace

void write_learner(ByteWriter& w, const LearnerParams& lp) {
    write_mlp_spec(w, lp.spec);
    w.u64(lp.num_classes);
    w.f32(lp.dropout_rate);
    write_params(w, lp.params);
}

LearnerParams read_learner(ByteReader& r) {
    LearnerParams lp;
    lp.spec = read_mlp_spec(r);
    lp.num_classes = static_cast<std::size_t>(r.u64());
    lp.dropout_rate = r.f32();
    lp.params = read_params(r);
    return lp;
}

void write_dgm(ByteWriter& w, const DgmState& dgm) {
    write_vae(w, dgm.generator);
    write_learner(w, dgm.learner);
    write_dict(w, dgm.dictionary);
    w.u64(dgm.age);
    w.u64(dgm.n_max);
    w.f32(dgm.kappa);
    w.u64(dgm.gen_sample_epochs);
}

DgmState read_dgm(ByteReader& r) {
    DgmState dgm;
    dgm.generator = read_vae(r);
    dgm.learner = read_learner(r);
    dgm.dictionary = read_dict(r);
    dgm.age = r.u64();
    dgm.n_max = static_cast<std::size_t>(r.u64());
    dgm.kappa = r.f32();
    dgm.gen_sample_epochs = r.u64();
    return dgm;
}

namespace {

void write_arch(ByteWriter& w, const DgmArch& a) {
    w.u64(a.input);
    write_dims(w, a.learner_hidden);
    w.u64(a.num_classes);
    write_dims(w, a.vae_enc);
    w.u64(a.vae_latent);
    write_dims(w, a.vae_dec);
}

DgmArch read_arch(ByteReader& r) {
    DgmArch a;
    a.input = static_cast<std::size_t>(r.u64());
    a.learner_hidden = read_dims(r);
    a.num_classes = static_cast<std::size_t>(r.u64());
    a.vae_enc = read_dims(r);
    a.vae_latent = static_cast<std::size_t>(r.u64());
    a.vae_dec = read_dims(r);
    return a;
}

} // namespace

void write_dgdmn(ByteWriter& w, const DgdmnState& state) {
    write_dgm(w, state.ltm);
    w.u32(static_cast<std::uint32_t>(state.n_stm));
    w.u64(state.seed);
    w.u64(state.sleep_count);
    w.u64(state.alloc_count);
    w.u64(state.anon_count);
    w.u64(state.retired_gen_sample_epochs);
    write_arch(w, state.ltm_arch);
    write_arch(w, state.sttm_arch);
    w.f32(state.gamma_sttm);
    w.f32(state.gamma_ltm);
    for (const auto& slot : state.sttm_pool) {
        w.u8(slot.assigned() ? 1 : 0);
        if (slot.assigned()) {
            w.str(slot.assigned_task->id);
            w.u64(slot.trained_sample_count);
            write_dgm(w, slot.dgm);
        }
    }
}

DgdmnState read_dgdmn(ByteReader& r) {
    DgdmnState state;
    state.ltm = read_dgm(r);
    state.n_stm = r.u32();
    state.seed = r.u64();
    state.sleep_count = r.u64();
    state.alloc_count = r.u64();
    state.anon_count = r.u64();
    state.retired_gen_sample_epochs = r.u64();
    state.ltm_arch = read_arch(r);
    state.sttm_arch = read_arch(r);
    state.gamma_sttm = r.f32();
    state.gamma_ltm = r.f32();
    state.sttm_pool.resize(state.n_stm);
    for (auto& slot : state.sttm_pool) {
        if (r.u8()) {
            slot.assigned_task = TaskDescriptor{r.str()};
            slot.trained_sample_count = r.u64();
            slot.dgm = read_dgm(r);
        }
    }
    return state;
}

void write_ewc(ByteWriter& w, const EwcState& e) {
    w.f32(e.lambda);
    w.u32(static_cast<std::uint32_t>(e.anchors.size()));
    for (const auto& a : e.anchors) {
        write_params(w, a.theta_star);
        write_params(w, a.fisher);
    }
}

EwcState read_ewc(ByteReader& r) {
    EwcState e;
    e.lambda = r.f32();
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        EwcAnchor a;
        a.theta_star = read_params(r);
        a.fisher = read_params(r);
        e.anchors.push_back(std::move(a));
    }
    return e;
}

void write_ppr(ByteWriter& w, const PprMemory& m) {
    w.u64(m.capacity);
    write_tensor(w, m.inputs);
    write_tensor(w, m.soft_labels);
}

PprMemory read_ppr(ByteReader& r) {
    PprMemory m;
    m.capacity = static_cast<std::size_t>(r.u64());
    m.inputs = read_tensor(r);
    m.soft_labels = read_tensor(r);
    return m;
}

void write_matrix(ByteWriter& w, const AccuracyMatrix& a) {
    w.u32(static_cast<std::uint32_t>(a.num_tasks()));
    w.u32(static_cast<std::uint32_t>(a.rows_filled()));
    for (std::size_t i = 0; i < a.rows_filled(); ++i)
        for (double v : a.row(i)) w.f32(v);
}

AccuracyMatrix read_matrix(ByteReader& r) {
    const std::uint32_t t = r.u32();
    const std::uint32_t rows = r.u32();
    AccuracyMatrix a(t);
    for (std::uint32_t i = 0; i < rows; ++i) {
        std::vector<double> row(i + 1);
        for (auto& v : row) v = r.f32();
        a.append_row(std::move(row));
    }
    return a;
}

// --- container ------------------------------------------------------------------

const CheckpointSection& Checkpoint::section(SectionKind kind) const {
    for (const auto& s : sections)
        if (s.kind == kind) return s;
    throw CheckpointError("checkpoint is missing a required section");
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
    ByteWriter w;
    w.raw(kMagic, 4);
    w.u16(c.version);
    w.u32(static_cast<std::uint32_t>(c.sections.size()));
    for (const auto& s : c.sections) {
        w.u32(static_cast<std::uint32_t>(s.kind));
        w.u64(s.payload.size());
        w.raw(s.payload.data(), s.payload.size());
    }
    return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError("bad magic bytes, not a checkpoint file");
    Checkpoint c;
    c.version = r.u16();
    if (c.version != kCheckpointVersion)
        throw CheckpointError("format version mismatch: file has " +
                              std::to_string(c.version) + ", reader supports " +
                              std::to_string(kCheckpointVersion));
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        CheckpointSection s;
        s.kind = static_cast<SectionKind>(r.u32());
        const std::uint64_t len = r.u64();
        s.payload.resize(static_cast<std::size_t>(len));
        r.raw(s.payload.data(), s.payload.size());
        c.sections.push_back(std::move(s));
    }
    return c;
}

void save_checkpoint_file(const std::string& path, const Checkpoint& c) {
    const auto bytes = encode_checkpoint(c);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw CheckpointError("failed writing " + path);
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

} // namespace dgdmn
