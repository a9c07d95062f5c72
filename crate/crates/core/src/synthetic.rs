//! Synthetic corpora with planted topics, for benchmarks, fixtures and demos.
//!
//! Every topic owns a legal-flavoured vocabulary that no other topic uses;
//! documents mix words from their topic with a small shared filler
//! vocabulary.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{CaseRecord, Corpus};
use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Topic names and their private vocabularies.
pub const TOPICS: &[(&str, &[&str])] = &[
    (
        "criminal procedure",
        &[
            "defendant", "prosecutor", "jury", "verdict", "felony", "indictment", "acquittal", "burglary",
            "homicide", "parole", "probation", "conviction", "testimony", "witness", "confession", "warrant",
            "seizure", "detective", "arrest", "custody", "bail", "plea", "robbery", "larceny", "perjury",
            "interrogation", "suspect", "sheriff", "inmate", "penitentiary",
        ],
    ),
    (
        "taxation",
        &[
            "revenue", "taxpayer", "deduction", "income", "levy", "assessment", "exemption", "treasury",
            "audit", "refund", "excise", "payroll", "dividend", "depreciation", "withholding", "bracket",
            "lien", "commissioner", "annuity", "bequest", "surtax", "stamp", "duty", "appraisal",
            "amortization", "accrual", "fiscal", "estate", "valuation", "collector",
        ],
    ),
    (
        "labor relations",
        &[
            "union", "strike", "wage", "employer", "employee", "bargaining", "picket", "overtime", "pension",
            "grievance", "arbitration", "layoff", "worker", "factory", "seniority", "lockout", "steward",
            "foreman", "apprentice", "shift", "payday", "walkout", "organizer", "dues", "hiring", "furlough",
            "salary", "workplace", "mill", "laborer",
        ],
    ),
    (
        "environmental regulation",
        &[
            "pollution", "emission", "wetland", "river", "wildlife", "habitat", "species", "discharge",
            "toxic", "waste", "conservation", "forest", "pesticide", "groundwater", "aquifer", "smog",
            "landfill", "contamination", "ecosystem", "endangered", "runoff", "sewage", "carbon", "ozone",
            "estuary", "timber", "fishery", "watershed", "hazardous", "cleanup",
        ],
    ),
    (
        "free expression",
        &[
            "speech", "press", "newspaper", "broadcast", "censorship", "religion", "worship", "church",
            "prayer", "pamphlet", "leaflet", "protest", "assembly", "obscenity", "libel", "defamation",
            "publisher", "editor", "expression", "flag", "symbol", "clergy", "sermon", "congregation",
            "advertisement", "billboard", "film", "magazine", "journalist", "newsletter",
        ],
    ),
    (
        "interstate commerce",
        &[
            "railroad", "interstate", "shipment", "freight", "carrier", "merchant", "commerce", "trade",
            "cargo", "vessel", "harbor", "warehouse", "inventory", "retailer", "wholesaler", "monopoly",
            "antitrust", "cartel", "merger", "competitor", "price", "patent", "trademark", "copyright",
            "franchise", "dealer", "manufacturer", "supplier", "trucking", "pipeline",
        ],
    ),
    (
        "elections",
        &[
            "ballot", "election", "voter", "redistricting", "apportionment", "precinct", "candidate",
            "campaign", "poll", "registration", "primary", "incumbent", "legislature", "senator", "governor",
            "gerrymander", "electorate", "literacy", "caucus", "nominee", "delegate", "canvass", "recount",
            "suffrage", "enfranchisement", "constituency", "plurality", "referendum", "initiative", "vote",
        ],
    ),
    (
        "immigration",
        &[
            "alien", "deportation", "citizenship", "naturalization", "visa", "asylum", "refugee", "border",
            "passport", "immigrant", "removal", "detention", "consulate", "quota", "sponsor", "nationality",
            "expatriation", "residency", "migrant", "entrant", "admission", "parolee", "exile", "emigrant",
            "stowaway", "smuggler", "checkpoint", "deportee", "sojourner", "denaturalization",
        ],
    ),
];

/// Words shared by every topic.
pub const FILLER: &[&str] = &[
    "court", "held", "judgment", "appeal", "petitioner", "respondent", "opinion", "statute", "reversed",
    "affirmed", "decision", "question", "law", "federal", "claim", "record",
];

const JUSTICES: &[&str] = &[
    "Marshall", "Brennan", "Warren", "Black", "Douglas", "Harlan", "Stewart", "White", "Blackmun", "Powell",
    "Rehnquist", "Stevens", "O'Connor", "Scalia", "Kennedy", "Souter", "Thomas", "Ginsburg", "Breyer",
];

const PARTIES: &[&str] = &[
    "Abbott", "Baker", "Carver", "Dalton", "Ellis", "Fowler", "Grant", "Hale", "Irving", "Jensen", "Keller",
    "Lowell", "Mercer", "Nolan", "Ortega", "Parker", "Quinn", "Ramsey", "Sutton", "Tate", "United States",
    "the State",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub documents: usize,
    pub topics: usize,
    /// Probability that a word comes from the shared filler list.
    pub filler_rate: f64,
    pub min_words: usize,
    pub max_words: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            documents: 600,
            topics: 6,
            filler_rate: 0.2,
            min_words: 40,
            max_words: 80,
            seed: 7,
        }
    }
}

/// A generated corpus and the topic each document was drawn from.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub topics: Vec<usize>,
}

/// Documents are assigned to topics round-robin so topic sizes differ by at
/// most one.
pub fn synthetic_corpus(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    if spec.topics == 0 || spec.topics > TOPICS.len() {
        return Err(Error::param("topics", format!("must lie in 1..={}", TOPICS.len())));
    }
    if spec.documents == 0 {
        return Err(Error::param("documents", "must be at least 1"));
    }
    if spec.min_words == 0 || spec.min_words > spec.max_words {
        return Err(Error::param("min_words", "must satisfy 1 <= min_words <= max_words"));
    }
    if !(0.0..1.0).contains(&spec.filler_rate) {
        return Err(Error::param("filler_rate", "must lie in [0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.documents);
    let mut topics = Vec::with_capacity(spec.documents);
    for i in 0..spec.documents {
        let t = i % spec.topics;
        let (_, vocab) = TOPICS[t];
        let len = rng.random_range(spec.min_words..=spec.max_words);
        let mut text = String::new();
        for w in 0..len {
            let word = if rng.random_bool(spec.filler_rate) {
                FILLER.choose(&mut rng)
            } else {
                vocab.choose(&mut rng)
            }
            .expect("non-empty word list");
            if w % 12 == 0 {
                if w > 0 {
                    text.push_str(". ");
                }
                let mut c = word.chars();
                let first = c.next().expect("non-empty word");
                text.extend(first.to_uppercase());
                text.push_str(c.as_str());
            } else {
                text.push(' ');
                text.push_str(word);
            }
        }
        text.push('.');
        let a = PARTIES.choose(&mut rng).expect("parties");
        let b = loop {
            let b = PARTIES.choose(&mut rng).expect("parties");
            if b != a {
                break b;
            }
        };
        let mut record = CaseRecord::new(format!("case-{i:04}"), rng.random_range(1950..=2020), text);
        record.case_name = format!("{a} v. {b}");
        record.justice = JUSTICES.choose(&mut rng).expect("justices").to_string();
        record.category = if rng.random_bool(0.8) { "majority" } else { "dissenting" }.to_string();
        record.source_url = format!("https://example.org/opinions/{i:04}");
        records.push(record);
        topics.push(t);
    }
    Ok(SyntheticCorpus {
        corpus: Corpus::from_records(records)?,
        topics,
    })
}

/// Gaussian blobs: one random centre per label (entries `N(0, 1)`) plus
/// isotropic noise with standard deviation `spread`.
pub fn planted_embeddings(labels: &[usize], dim: usize, spread: f64, seed: u64) -> Vec<DenseVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let centres: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    labels
        .iter()
        .map(|&l| {
            DenseVector(
                centres[l]
                    .iter()
                    .map(|c| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        c + spread * z
                    })
                    .collect(),
            )
        })
        .collect()
}
