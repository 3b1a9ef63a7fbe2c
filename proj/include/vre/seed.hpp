#pragma once

#include <string>

#include "vre/store.hpp"

namespace vre::seed {

/// Deterministic fixture sizes. The defaults satisfy every built-in
/// benchmark script (View100 needs >=100 patients, UpdateRep100 >=100
/// repository items).
struct SeedProfile {
    int clinicians = 10;
    int patients = 150;
    int contents = 150;
    int goals_per_patient = 2;
    int treatments_per_patient = 2;
    int information_per_patient = 1;
};

struct SeedSummary {
    EntityId admin_account_id;
    int accounts = 0;
    int records = 0;  // every record written, accounts included
};

/// Populates an empty store with the official fixture: one administrator
/// (admin/admin), clinicians (clinicianN/clinician), patients
/// (patientN/patient) with links, a small category tree and repository
/// contents. Output is identical across backends and across runs modulo ids.
SeedSummary seed_store(store::Store& store, const SeedProfile& profile = {},
                       const std::string& content_root = "/vre/repository");

}  // namespace vre::seed
