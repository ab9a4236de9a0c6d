#include <expat.h>
#include <zlib.h>

#include <array>
#include <deque>
#include <fstream>
#include <istream>
#include <streambuf>

#include "kgprover/corpus.hpp"
#include "kgprover/error.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

namespace {

constexpr std::size_t kChunk = 1 << 16;

enum class Field { none, title, ns, text, siteinfo_namespace };

}  // namespace

struct DumpReader::Impl {
    std::istream& in;
    XML_Parser parser = nullptr;
    bool finished = false;
    std::size_t consumed = 0;

    std::deque<RawPage> ready;
    std::vector<std::string> warnings;
    std::map<std::string, std::string> namespaces;  // key -> name

    // element state
    int depth = 0;
    int page_depth = -1;
    int revision_depth = -1;
    bool in_siteinfo = false;
    Field field = Field::none;
    std::string buffer;
    std::string ns_key;
    std::string ns_attr_key;
    bool have_title = false;
    RawPage page;

    explicit Impl(std::istream& stream) : in(stream) {
        parser = XML_ParserCreate("UTF-8");
        if (!parser) throw Error("cannot allocate XML parser");
        XML_SetUserData(parser, this);
        XML_SetElementHandler(parser, &Impl::on_start, &Impl::on_end);
        XML_SetCharacterDataHandler(parser, &Impl::on_text);
    }
    ~Impl() { XML_ParserFree(parser); }

    static void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
        static_cast<Impl*>(data)->start(name, attrs);
    }
    static void on_end(void* data, const XML_Char* name) { static_cast<Impl*>(data)->end(name); }
    static void on_text(void* data, const XML_Char* s, int len) {
        auto* self = static_cast<Impl*>(data);
        if (self->field != Field::none) self->buffer.append(s, static_cast<std::size_t>(len));
    }

    static const char* attr(const XML_Char** attrs, std::string_view key) {
        for (int i = 0; attrs[i]; i += 2)
            if (key == attrs[i]) return attrs[i + 1];
        return nullptr;
    }

    void start(std::string_view name, const XML_Char** attrs) {
        ++depth;
        if (name == "siteinfo") {
            in_siteinfo = true;
        } else if (in_siteinfo && name == "namespace") {
            const char* key = attr(attrs, "key");
            ns_attr_key = key ? key : "";
            begin(Field::siteinfo_namespace);
        } else if (name == "page" && page_depth < 0) {
            page_depth = depth;
            page = RawPage{};
            ns_key.clear();
            have_title = false;
        } else if (page_depth >= 0) {
            if (depth == page_depth + 1 && name == "title") {
                begin(Field::title);
            } else if (depth == page_depth + 1 && name == "ns") {
                begin(Field::ns);
            } else if (depth == page_depth + 1 && name == "redirect") {
                if (const char* t = attr(attrs, "title")) page.redirect_target = t;
            } else if (depth == page_depth + 1 && name == "revision") {
                revision_depth = depth;
            } else if (revision_depth >= 0 && depth == revision_depth + 1 && name == "text") {
                // dumps with several revisions keep the last one
                begin(Field::text);
            }
        }
    }

    void begin(Field f) {
        field = f;
        buffer.clear();
    }

    void end(std::string_view name) {
        switch (field) {
            case Field::title:
                page.title = std::string(text::trim(buffer));
                have_title = !page.title.empty();
                break;
            case Field::ns: ns_key = std::string(text::trim(buffer)); break;
            case Field::text: page.wikitext = std::move(buffer); break;
            case Field::siteinfo_namespace:
                namespaces[ns_attr_key] = std::string(text::trim(buffer));
                break;
            case Field::none: break;
        }
        field = Field::none;
        buffer.clear();

        if (name == "siteinfo") in_siteinfo = false;
        if (depth == revision_depth) revision_depth = -1;
        if (depth == page_depth) {
            finish_page();
            page_depth = -1;
        }
        --depth;
    }

    void finish_page() {
        if (!have_title) {
            warnings.push_back("page ending at byte " +
                               std::to_string(XML_GetCurrentByteIndex(parser)) +
                               " has no title; skipped");
            return;
        }
        page.ns = resolve_namespace();
        if (!page.redirect_target) {
            auto body = text::trim(page.wikitext);
            if (text::istarts_with(body, "#redirect")) {
                auto open = body.find("[[");
                auto close = body.find("]]", open == std::string_view::npos ? 0 : open);
                if (open != std::string_view::npos && close != std::string_view::npos) {
                    auto target = body.substr(open + 2, close - open - 2);
                    target = target.substr(0, target.find('|'));
                    page.redirect_target = std::string(text::trim(target));
                }
            }
        }
        ready.push_back(std::move(page));
        page = RawPage{};
    }

    std::string resolve_namespace() const {
        if (auto it = namespaces.find(ns_key); it != namespaces.end()) return it->second;
        if (ns_key.empty() || ns_key == "0") {
            // no <ns> element and no siteinfo: fall back to the title prefix
            if (ns_key.empty() && namespaces.empty()) {
                auto colon = page.title.find(':');
                if (colon != std::string::npos) return page.title.substr(0, colon);
            }
            return {};
        }
        auto colon = page.title.find(':');
        return colon == std::string::npos ? std::string{} : page.title.substr(0, colon);
    }

    void raise() {
        throw ParseError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser)),
                         static_cast<std::size_t>(XML_GetCurrentByteIndex(parser)));
    }

    void feed() {
        std::array<char, kChunk> buf{};
        in.read(buf.data(), buf.size());
        auto got = static_cast<std::size_t>(in.gcount());
        consumed += got;
        bool last = got < buf.size();
        if (XML_Parse(parser, buf.data(), static_cast<int>(got), last ? 1 : 0) == XML_STATUS_ERROR)
            raise();
        if (last) finished = true;
    }
};

DumpReader::DumpReader(std::istream& in) : impl_(std::make_unique<Impl>(in)) {}
DumpReader::~DumpReader() = default;

std::optional<RawPage> DumpReader::next() {
    while (impl_->ready.empty() && !impl_->finished) impl_->feed();
    if (impl_->ready.empty()) return std::nullopt;
    RawPage page = std::move(impl_->ready.front());
    impl_->ready.pop_front();
    return page;
}

const std::vector<std::string>& DumpReader::warnings() const noexcept { return impl_->warnings; }
std::size_t DumpReader::bytes_consumed() const noexcept { return impl_->consumed; }

std::vector<RawPage> parse_dump(std::istream& in, std::vector<std::string>* warnings) {
    DumpReader reader(in);
    std::vector<RawPage> pages;
    while (auto page = reader.next()) pages.push_back(std::move(*page));
    if (warnings) *warnings = reader.warnings();
    return pages;
}

namespace {

class GzipStreambuf : public std::streambuf {
public:
    explicit GzipStreambuf(const std::filesystem::path& path) : file_(gzopen(path.c_str(), "rb")) {
        if (!file_) throw Error("cannot open " + path.string());
        gzbuffer(file_, kChunk);
    }
    ~GzipStreambuf() override { gzclose(file_); }

protected:
    int_type underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        int n = gzread(file_, buf_.data(), static_cast<unsigned>(buf_.size()));
        if (n < 0) {
            int err = 0;
            throw Error(std::string("gzip read failed: ") + gzerror(file_, &err));
        }
        if (n == 0) return traits_type::eof();
        setg(buf_.data(), buf_.data(), buf_.data() + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    gzFile file_;
    std::array<char, kChunk> buf_{};
};

class GzipStream : public std::istream {
public:
    explicit GzipStream(const std::filesystem::path& path) : std::istream(nullptr), buf_(path) {
        rdbuf(&buf_);
    }

private:
    GzipStreambuf buf_;
};

}  // namespace

std::unique_ptr<std::istream> open_dump(const std::filesystem::path& path) {
    unsigned char magic[2] = {0, 0};
    {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) throw Error("cannot open " + path.string());
        probe.read(reinterpret_cast<char*>(magic), 2);
    }
    if (magic[0] == 0x1f && magic[1] == 0x8b) return std::make_unique<GzipStream>(path);
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) throw Error("cannot open " + path.string());
    return in;
}

}  // namespace kgp
