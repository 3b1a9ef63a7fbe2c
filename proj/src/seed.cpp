#include "vre/seed.hpp"

#include <random>
#include <stdexcept>

#include "vre/auth.hpp"
#include "vre/crypto.hpp"

namespace vre::seed {

namespace {

/// Deterministic stand-ins for the random salt / filename generators so two
/// seeds of the same profile produce identical dumps modulo ids.
class FixtureRng {
public:
    FixtureRng() : rng_(0x5eedf00d) {}

    std::string salt() {
        std::vector<std::uint8_t> bytes(16);
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng_() & 0xff);
        return crypto::base64_encode(bytes);
    }

    std::string token(std::size_t chars) {
        static constexpr char kAlnum[] =
            "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
        std::string out(chars, '0');
        for (auto& c : out) c = kAlnum[rng_() % 62];
        return out;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace

SeedSummary seed_store(store::Store& store, const SeedProfile& profile,
                       const std::string& content_root) {
    SeedSummary summary;
    FixtureRng rng;

    auto must_create = [&store, &summary](const std::string& collection, json doc) -> EntityId {
        auto r = store.create(collection, std::move(doc));
        if (!r.ok()) {
            throw std::runtime_error("seed failed on " + collection + ": " + r.status.detail);
        }
        ++summary.records;
        return r.value;
    };

    auto make_account = [&](const std::string& username, const std::string& password,
                            const char* role) {
        const std::string salt = rng.salt();
        ++summary.accounts;
        return must_create("Accounts", json{{"username", username},
                                            {"salt", salt},
                                            {"password_hash", auth::hash_password(password, salt)},
                                            {"role", role}});
    };

    // Accounts and profiles.
    summary.admin_account_id = make_account("admin", "admin", "Administrator");
    must_create("Administrators",
                json{{"account_id", summary.admin_account_id}, {"display_name", "VRE Administrator"}});

    std::vector<EntityId> clinician_ids;
    for (int i = 1; i <= profile.clinicians; ++i) {
        EntityId account = make_account("clinician" + std::to_string(i), "clinician", "Clinician");
        clinician_ids.push_back(must_create(
            "Clinicians",
            json{{"account_id", account}, {"display_name", "Clinician " + std::to_string(i)}}));
    }

    std::vector<EntityId> patient_ids;
    for (int i = 1; i <= profile.patients; ++i) {
        EntityId account = make_account("patient" + std::to_string(i), "patient", "Patient");
        json patient{{"account_id", account}, {"display_name", "Patient " + std::to_string(i)}};
        if (i % 3 == 0) patient["interface_config"] = json{{"buttons", "large"}, {"contrast", "high"}};
        patient_ids.push_back(must_create("Patients", std::move(patient)));
    }

    // Every patient is assigned a clinician, round-robin.
    if (!clinician_ids.empty()) {
        for (std::size_t i = 0; i < patient_ids.size(); ++i) {
            must_create("CliniciansPatients",
                        json{{"clinician_id", clinician_ids[i % clinician_ids.size()]},
                             {"patient_id", patient_ids[i]}});
        }
    }

    // Category tree.
    EntityId root = must_create("Categories", json{{"name", "Repository"}});
    EntityId exercises =
        must_create("Categories", json{{"name", "Exercises"}, {"parent_id", root}});
    EntityId guides = must_create("Categories", json{{"name", "Guides"}, {"parent_id", root}});
    std::vector<EntityId> leaves = {
        must_create("Categories", json{{"name", "Upper body"}, {"parent_id", exercises}}),
        must_create("Categories", json{{"name", "Lower body"}, {"parent_id", exercises}}),
        must_create("Categories", json{{"name", "Balance"}, {"parent_id", exercises}}),
        must_create("Categories", json{{"name", "Daily living"}, {"parent_id", guides}}),
    };

    // Repository contents.
    struct MediaSpec {
        const char* kind;
        const char* media_type;
        const char* extension;
        const char* name_prefix;
    };
    static constexpr MediaSpec kMedia[] = {
        {"Video", "video/mp4", ".mp4", "Exercise recording "},
        {"Audio", "audio/mpeg", ".mp3", "Audio guide "},
        {"Text", "text/plain", ".txt", "Instruction sheet "},
        {"Other", "application/pdf", ".pdf", "Information pack "},
    };
    std::vector<EntityId> content_ids;
    for (int i = 0; i < profile.contents; ++i) {
        const auto& media = kMedia[i % 4];
        content_ids.push_back(must_create(
            "Contents",
            json{{"name", media.name_prefix + std::to_string(i + 1)},
                 {"media_type", media.media_type},
                 {"patient_description", "Follow along with this resource"},
                 {"clinician_description", "Fixture resource " + std::to_string(i + 1)},
                 {"category_id", leaves[static_cast<std::size_t>(i) % leaves.size()]},
                 {"path", content_root + "/" + rng.token(24) + media.extension},
                 {"creator_id", summary.admin_account_id},
                 {"kind", media.kind}}));
    }

    // Per-patient clinical records.
    std::vector<EntityId> treatment_ids;
    std::vector<EntityId> information_ids;
    for (std::size_t p = 0; p < patient_ids.size(); ++p) {
        for (int g = 0; g < profile.goals_per_patient; ++g) {
            json goal{{"patient_id", patient_ids[p]},
                      {"description",
                       "Goal " + std::to_string(g + 1) + " for patient " + std::to_string(p + 1)},
                      {"term", g % 2 == 0 ? "Short" : "Long"},
                      {"comments", json::array()}};
            if (g == 0) {
                goal["comments"].push_back(json{{"author_id", summary.admin_account_id},
                                                {"text", "Discussed at the last review"},
                                                {"timestamp", 1431561600000}});
            }
            must_create("Goals", std::move(goal));
        }
        for (int t = 0; t < profile.treatments_per_patient; ++t) {
            treatment_ids.push_back(must_create(
                "Treatments",
                json{{"patient_id", patient_ids[p]},
                     {"title", "Treatment " + std::to_string(t + 1) + " for patient " +
                                   std::to_string(p + 1)},
                     {"description", "Practice the assigned exercise"},
                     {"repetitions_per_day", 3 + t}}));
        }
        for (int n = 0; n < profile.information_per_patient; ++n) {
            information_ids.push_back(must_create(
                "Information", json{{"patient_id", patient_ids[p]},
                                    {"title", "Living with your condition"},
                                    {"body", "General advice for patient " + std::to_string(p + 1)}}));
        }
    }

    // Content assignments: every other treatment and every fifth
    // information section gets a repository item.
    if (!content_ids.empty()) {
        for (std::size_t t = 0; t < treatment_ids.size(); t += 2) {
            must_create("TreatmentContent",
                        json{{"treatment_id", treatment_ids[t]},
                             {"content_id", content_ids[t % content_ids.size()]}});
        }
        for (std::size_t n = 0; n < information_ids.size(); n += 5) {
            must_create("TreatmentContent",
                        json{{"information_id", information_ids[n]},
                             {"content_id", content_ids[n % content_ids.size()]}});
        }
    }

    store.flush();
    return summary;
}

}  // namespace vre::seed
