use super::journal::{Journal, JournalEntry, StoreError};
use super::wire::*;
use super::SyncError;
use crate::allocation::{
    difficulty, select_next, AllocatedQuestion, AllocationToken, DifficultyStats, SharedDifficulty,
    StudentId, StudentLectureState, DEFAULT_MAX_ALLOCATION,
};
use crate::content::{Catalog, ImportOutcome, LectureId, LecturePath, Question, QuestionId};
use crate::grading::{compute_grade, AnswerHistory, AnswerOutcome, Grade, GradePolicy, GradeTracker};
use crate::pacing::{timeout_seconds, TimeoutPolicy};
use dashmap::DashMap;
use parking_lot::{Mutex, RwLock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

/// Slack, in seconds, allowed beyond the time limit before an answer that
/// claims not to have timed out is rejected.
pub const TIMEOUT_TOLERANCE_SECS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LectureSettings {
    pub grade_policy: GradePolicy,
    pub timeout_policy: TimeoutPolicy,
}

/// Authenticated identity of a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Caller {
    /// Holder of the bootstrap admin token.
    Admin,
    User(StudentId),
}

/// History derived from stored answers taken in sequence order.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedHistory {
    pub history: AnswerHistory,
    pub accepted: Vec<u64>,
    pub rejected: Vec<u64>,
    pub grade: Grade,
}

/// Replays stored answers in `seq` order. An answer that claims to be in
/// time but took longer than the limit at the grade before it (plus the
/// tolerance) is excluded from the history.
pub fn derive_history<'a, I>(answers: I, settings: &LectureSettings) -> DerivedHistory
where
    I: IntoIterator<Item = &'a StoredAnswer>,
{
    let mut tracker = GradeTracker::new(settings.grade_policy);
    let mut out = DerivedHistory {
        history: AnswerHistory::new(),
        accepted: Vec::new(),
        rejected: Vec::new(),
        grade: Grade::ZERO,
    };
    for a in answers {
        let limit = timeout_seconds(tracker.grade(), &settings.timeout_policy);
        if !a.timed_out && !limit.allows(a.time_taken, TIMEOUT_TOLERANCE_SECS) {
            out.rejected.push(a.seq);
            continue;
        }
        let outcome = AnswerOutcome::new(a.correct, a.timed_out, a.time_taken);
        tracker.push(outcome.correct);
        out.history.push(outcome);
        out.accepted.push(a.seq);
    }
    out.grade = compute_grade(&out.history, &settings.grade_policy);
    out
}

struct Learner {
    base: StudentLectureState,
    settings: LectureSettings,
    answers: BTreeMap<u64, StoredAnswer>,
    accepted: HashSet<u64>,
    tracker: GradeTracker,
    last_activity: Option<i64>,
}

impl Learner {
    fn new(student: StudentId, lecture: LectureId, settings: LectureSettings) -> Self {
        Learner {
            base: StudentLectureState::new(student, lecture),
            settings,
            answers: BTreeMap::new(),
            accepted: HashSet::new(),
            tracker: GradeTracker::new(settings.grade_policy),
            last_activity: None,
        }
    }

    fn max_seq(&self) -> u64 {
        self.answers.keys().next_back().copied().unwrap_or(0)
    }

    /// Adds answers (sorted by seq, all new) and refreshes derived state.
    fn apply(&mut self, fresh: Vec<StoredAnswer>) {
        let in_order = fresh.first().is_none_or(|a| a.seq > self.max_seq());
        for a in &fresh {
            self.last_activity = Some(self.last_activity.map_or(a.server_ts, |t| t.max(a.server_ts)));
        }
        if in_order {
            for a in fresh {
                let limit = timeout_seconds(self.tracker.grade(), &self.settings.timeout_policy);
                if a.timed_out || limit.allows(a.time_taken, TIMEOUT_TOLERANCE_SECS) {
                    let outcome = AnswerOutcome::new(a.correct, a.timed_out, a.time_taken);
                    self.tracker.push(outcome.correct);
                    self.base.history.push(outcome);
                    self.accepted.insert(a.seq);
                    self.base.last_answered = Some(a.question.clone());
                }
                self.answers.insert(a.seq, a);
            }
            self.base.grade = self.tracker.grade();
        } else {
            for a in fresh {
                self.answers.insert(a.seq, a);
            }
            self.rebuild();
        }
    }

    fn rebuild(&mut self) {
        let derived = derive_history(self.answers.values(), &self.settings);
        let mut tracker = GradeTracker::new(self.settings.grade_policy);
        for o in derived.history.outcomes() {
            tracker.push(o.correct);
        }
        self.tracker = tracker;
        self.base.last_answered = derived
            .accepted
            .last()
            .map(|s| self.answers[s].question.clone());
        self.accepted = derived.accepted.into_iter().collect();
        self.base.history = derived.history;
        self.base.grade = derived.grade;
    }
}

#[derive(Debug, Clone)]
struct TokenBinding {
    student: StudentId,
    lecture: LectureId,
    question: QuestionId,
}

/// The sync server's state machine. HTTP is a thin layer over this.
pub struct SyncService {
    catalog: RwLock<Catalog>,
    settings: RwLock<HashMap<LectureId, LectureSettings>>,
    learners: DashMap<(StudentId, LectureId), Arc<Mutex<Learner>>>,
    tokens: DashMap<AllocationToken, TokenBinding>,
    difficulty: DashMap<QuestionId, SharedDifficulty>,
    users: RwLock<HashMap<StudentId, UserRecord>>,
    tokens_to_users: RwLock<HashMap<String, StudentId>>,
    admin_token_hash: Option<String>,
    journal: Mutex<(Box<dyn Journal>, i64)>,
    rng: Mutex<ChaCha20Rng>,
    max_allocation: usize,
}

fn hash_token(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

fn now_millis() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as i64)
        .unwrap_or(0)
}

impl SyncService {
    /// Builds the service by replaying `entries`, then appends new entries
    /// to `journal`.
    pub fn open(
        journal: Box<dyn Journal>,
        entries: Vec<JournalEntry>,
        admin_token: Option<&str>,
    ) -> Result<Self, SyncError> {
        let svc = SyncService {
            catalog: RwLock::new(Catalog::new()),
            settings: RwLock::new(HashMap::new()),
            learners: DashMap::new(),
            tokens: DashMap::new(),
            difficulty: DashMap::new(),
            users: RwLock::new(HashMap::new()),
            tokens_to_users: RwLock::new(HashMap::new()),
            admin_token_hash: admin_token.map(hash_token),
            journal: Mutex::new((journal, 0)),
            rng: Mutex::new(ChaCha20Rng::from_os_rng()),
            max_allocation: DEFAULT_MAX_ALLOCATION,
        };
        let mut last_ts = 0;
        for entry in entries {
            if let JournalEntry::Answers { answers, .. } = &entry {
                last_ts = answers.iter().map(|a| a.server_ts).fold(last_ts, i64::max);
            }
            svc.replay(entry)?;
        }
        svc.journal.lock().1 = last_ts;
        Ok(svc)
    }

    /// Service over an in-memory journal, for tests and examples.
    pub fn in_memory(admin_token: Option<&str>) -> Self {
        Self::open(Box::new(super::MemoryJournal::new()), Vec::new(), admin_token)
            .expect("empty replay cannot fail")
    }

    /// Seeds token generation; tests use this for reproducible allocations.
    pub fn with_rng_seed(self, seed: u64) -> Self {
        *self.rng.lock() = ChaCha20Rng::seed_from_u64(seed);
        self
    }

    fn replay(&self, entry: JournalEntry) -> Result<(), SyncError> {
        match entry {
            JournalEntry::Import {
                lecture,
                grade_policy,
                timeout_policy,
                questions,
            } => {
                self.apply_import(&lecture, grade_policy, timeout_policy, questions)?;
            }
            JournalEntry::Allocate { student, lecture, added } => {
                let learner = self.learner(&student, &lecture)?;
                let mut l = learner.lock();
                self.bind_tokens(&student, &lecture, &added);
                l.base.allocation.extend(added);
            }
            JournalEntry::Answers { student, lecture, answers } => {
                let learner = self.learner(&student, &lecture)?;
                let mut l = learner.lock();
                self.count_difficulty(&answers);
                l.apply(answers);
            }
            JournalEntry::User { user } => self.apply_user(user),
        }
        Ok(())
    }

    /// Appends under the journal lock, assigning a non-decreasing server
    /// timestamp. `build` receives the timestamp.
    fn commit<F>(&self, build: F) -> Result<(JournalEntry, i64), StoreError>
    where
        F: FnOnce(i64) -> JournalEntry,
    {
        let mut guard = self.journal.lock();
        let ts = now_millis().max(guard.1);
        let entry = build(ts);
        guard.0.append(&entry)?;
        guard.1 = ts;
        Ok((entry, ts))
    }

    fn learner(&self, student: &StudentId, lecture: &LectureId) -> Result<Arc<Mutex<Learner>>, SyncError> {
        let key = (student.clone(), lecture.clone());
        if let Some(l) = self.learners.get(&key) {
            return Ok(l.clone());
        }
        let settings = *self
            .settings
            .read()
            .get(lecture)
            .ok_or_else(|| SyncError::UnknownLecture(lecture.to_string()))?;
        Ok(self
            .learners
            .entry(key)
            .or_insert_with(|| Arc::new(Mutex::new(Learner::new(student.clone(), lecture.clone(), settings))))
            .clone())
    }

    fn bind_tokens(&self, student: &StudentId, lecture: &LectureId, added: &[AllocatedQuestion]) {
        for a in added {
            self.tokens.insert(
                a.token.clone(),
                TokenBinding {
                    student: student.clone(),
                    lecture: lecture.clone(),
                    question: a.question.clone(),
                },
            );
        }
    }

    fn count_difficulty(&self, answers: &[StoredAnswer]) {
        for a in answers {
            self.difficulty.entry(a.question.clone()).or_default().record(a.correct);
        }
    }

    fn apply_import(
        &self,
        path: &LecturePath,
        grade_policy: GradePolicy,
        timeout_policy: TimeoutPolicy,
        questions: Vec<Question>,
    ) -> Result<ImportOutcome, SyncError> {
        let outcome = self.catalog.write().import(path, questions)?;
        self.settings
            .write()
            .entry(path.lecture_id())
            .or_insert(LectureSettings {
                grade_policy,
                timeout_policy,
            });
        Ok(outcome)
    }

    fn apply_user(&self, user: UserRecord) {
        self.tokens_to_users
            .write()
            .insert(user.token_hash.clone(), user.id.clone());
        self.users.write().insert(user.id.clone(), user);
    }

    // ---- administration -------------------------------------------------

    /// Adds questions to a lecture. Policies apply only when the lecture is
    /// new; an existing lecture keeps the settings it was created with.
    pub fn import_questions(
        &self,
        path: &LecturePath,
        questions: Vec<Question>,
        settings: LectureSettings,
    ) -> Result<ImportOutcome, SyncError> {
        settings.grade_policy.validate()?;
        settings.timeout_policy.validate()?;
        let planned = self.catalog.read().plan_import(path, &questions)?;
        if planned.added == 0 {
            return Ok(planned);
        }
        let mut catalog = self.catalog.write();
        catalog.plan_import(path, &questions)?;
        self.commit(|_| JournalEntry::Import {
            lecture: path.clone(),
            grade_policy: settings.grade_policy,
            timeout_policy: settings.timeout_policy,
            questions: questions.clone(),
        })?;
        let outcome = catalog.import(path, questions)?;
        drop(catalog);
        self.settings.write().entry(path.lecture_id()).or_insert(settings);
        Ok(outcome)
    }

    /// Registers a user and returns their bearer token.
    pub fn create_user(&self, caller: &Caller, new: NewUser) -> Result<String, SyncError> {
        if !self.is_admin(caller) {
            return Err(SyncError::Forbidden);
        }
        if new.id.as_str().is_empty() {
            return Err(SyncError::InvalidRequest("empty user id".into()));
        }
        let mut users = self.users.write();
        if users.contains_key(&new.id) {
            return Err(SyncError::UserExists(new.id.to_string()));
        }
        let mut secret = [0u8; 24];
        self.rng.lock().fill(&mut secret);
        let token = hex::encode(secret);
        let user = UserRecord {
            id: new.id,
            token_hash: hash_token(&token),
            class: new.class,
            tutor_of: new.tutor_of,
            admin: new.admin,
        };
        self.commit(|_| JournalEntry::User { user: user.clone() })?;
        self.tokens_to_users
            .write()
            .insert(user.token_hash.clone(), user.id.clone());
        users.insert(user.id.clone(), user);
        Ok(token)
    }

    pub fn authenticate(&self, bearer: &str) -> Option<Caller> {
        let h = hash_token(bearer);
        if self.admin_token_hash.as_deref() == Some(h.as_str()) {
            return Some(Caller::Admin);
        }
        self.tokens_to_users.read().get(&h).cloned().map(Caller::User)
    }

    fn is_admin(&self, caller: &Caller) -> bool {
        match caller {
            Caller::Admin => true,
            Caller::User(id) => self.users.read().get(id).is_some_and(|u| u.admin),
        }
    }

    // ---- student API ----------------------------------------------------

    pub fn catalog(&self) -> Vec<CatalogCourse> {
        let catalog = self.catalog.read();
        catalog
            .courses()
            .iter()
            .map(|c| CatalogCourse {
                id: c.id.clone(),
                title: c.title.clone(),
                tutorials: c
                    .tutorials
                    .iter()
                    .map(|t| CatalogTutorial {
                        id: t.id.clone(),
                        title: t.title.clone(),
                        lectures: t
                            .lectures
                            .iter()
                            .map(|l| CatalogLecture {
                                id: l.id.clone(),
                                title: l.title.clone(),
                                question_count: l.question_ids.len(),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect()
    }

    /// Returns the student's allocation for a lecture, creating or topping
    /// it up as needed, with full question bodies for offline feedback.
    pub fn get_allocation(&self, student: &StudentId, lecture: &LectureId) -> Result<AllocationPayload, SyncError> {
        let learner = self.learner(student, lecture)?;
        let mut l = learner.lock();
        let bank: Vec<QuestionId> = self
            .catalog
            .read()
            .lecture(lecture)
            .map(|lec| lec.question_ids.clone())
            .ok_or_else(|| SyncError::UnknownLecture(lecture.to_string()))?;

        let mut draft = l.base.clone();
        let added = draft.allocate(&bank, self.max_allocation, &mut *self.rng.lock())?;
        if !added.is_empty() {
            self.commit(|_| JournalEntry::Allocate {
                student: student.clone(),
                lecture: lecture.clone(),
                added: added.clone(),
            })?;
            self.bind_tokens(student, lecture, &added);
            l.base.allocation.extend(added);
        }

        let catalog = self.catalog.read();
        let questions = l
            .base
            .allocation
            .iter()
            .filter_map(|a| {
                catalog.question(&a.question).map(|q| QuestionPayload {
                    token: a.token.clone(),
                    stem: q.stem.clone(),
                    choices: q.choices.clone(),
                    explanation: q.explanation.clone(),
                    image_url: q.image_url.clone(),
                })
            })
            .collect();
        Ok(AllocationPayload {
            lecture_id: lecture.clone(),
            questions,
            grade_policy: l.settings.grade_policy,
            timeout_policy: l.settings.timeout_policy,
            grade: l.base.grade.value(),
            answered: l.base.history.len(),
        })
    }

    /// Applies an offline answer batch. Idempotent per
    /// `(student, lecture, clientSeq)`; atomic per batch.
    pub fn ingest_batch(&self, caller: &Caller, batch: UploadBatch) -> Result<Ack, SyncError> {
        if *caller != Caller::User(batch.student_id.clone()) {
            return Err(SyncError::Forbidden);
        }
        let learner = self.learner(&batch.student_id, &batch.lecture_id)?;
        let mut l = learner.lock();

        let mut order: Vec<usize> = (0..batch.records.len()).collect();
        order.sort_by_key(|&i| batch.records[i].client_seq);
        let mut statuses: Vec<Option<RecordStatus>> = vec![None; batch.records.len()];
        let mut fresh: Vec<(usize, StoredAnswer)> = Vec::new();
        let mut seen = HashSet::new();
        {
            let catalog = self.catalog.read();
            for i in order {
                let r = &batch.records[i];
                let status = if r.client_seq == 0 {
                    Some(RecordStatus::rejected("invalid_seq"))
                } else if l.answers.contains_key(&r.client_seq) || !seen.insert(r.client_seq) {
                    Some(RecordStatus::Duplicate)
                } else if !(r.time_taken.is_finite() && r.time_taken >= 0.0) {
                    Some(RecordStatus::rejected("invalid_time"))
                } else {
                    let bound = self.tokens.get(&r.token).filter(|b| {
                        b.student == batch.student_id && b.lecture == batch.lecture_id
                    });
                    match bound.and_then(|b| catalog.question(&b.question)) {
                        None => Some(RecordStatus::rejected("unknown_token")),
                        Some(q) => {
                            let k = q.choices.len();
                            let chosen = r.chosen_index.filter(|&c| c < k);
                            if !r.timed_out && chosen.is_none() {
                                Some(RecordStatus::rejected("invalid_choice"))
                            } else {
                                fresh.push((
                                    i,
                                    StoredAnswer {
                                        seq: r.client_seq,
                                        token: r.token.clone(),
                                        question: q.id.clone(),
                                        chosen: if r.timed_out { None } else { chosen },
                                        correct: !r.timed_out && chosen == Some(q.correct_index()),
                                        timed_out: r.timed_out,
                                        time_taken: r.time_taken,
                                        client_ts: r.client_timestamp,
                                        server_ts: 0,
                                    },
                                ));
                                None
                            }
                        }
                    }
                };
                statuses[i] = status;
            }
        }

        if !fresh.is_empty() {
            let answers: Vec<StoredAnswer> = fresh.iter().map(|(_, a)| a.clone()).collect();
            let (entry, _) = self.commit(|ts| JournalEntry::Answers {
                student: batch.student_id.clone(),
                lecture: batch.lecture_id.clone(),
                answers: answers
                    .into_iter()
                    .map(|mut a| {
                        a.server_ts = ts;
                        a
                    })
                    .collect(),
            })?;
            let JournalEntry::Answers { answers, .. } = entry else {
                unreachable!()
            };
            self.count_difficulty(&answers);
            l.apply(answers);
            for (i, a) in &fresh {
                statuses[*i] = Some(if l.accepted.contains(&a.seq) {
                    RecordStatus::Accepted
                } else {
                    RecordStatus::rejected("timeout_violation")
                });
            }
        }

        Ok(Ack {
            statuses: batch
                .records
                .iter()
                .zip(statuses)
                .map(|(r, s)| RecordAck {
                    client_seq: r.client_seq,
                    status: s.expect("every record classified"),
                })
                .collect(),
            grade: l.base.grade.value(),
            answered: l.base.history.len(),
        })
    }

    /// Draws the next question for a student from their allocation.
    pub fn next_question<R: Rng + ?Sized>(
        &self,
        student: &StudentId,
        lecture: &LectureId,
        rng: &mut R,
    ) -> Result<AllocatedQuestion, SyncError> {
        let learner = self.learner(student, lecture)?;
        let l = learner.lock();
        let picked = select_next(&l.base, |q| difficulty(self.difficulty_stats(q)), rng)?;
        Ok(picked.clone())
    }

    pub fn difficulty_stats(&self, question: &QuestionId) -> DifficultyStats {
        self.difficulty
            .get(question)
            .map(|d| d.snapshot())
            .unwrap_or_default()
    }

    // ---- tutor / admin views --------------------------------------------

    /// One row per student of `class` and lecture in the catalog.
    pub fn class_progress(&self, caller: &Caller, class: &str) -> Result<Vec<ProgressRow>, SyncError> {
        let allowed = self.is_admin(caller)
            || matches!(caller, Caller::User(id)
                if self.users.read().get(id).is_some_and(|u| u.tutor_of.iter().any(|c| c == class)));
        if !allowed {
            return Err(SyncError::Forbidden);
        }
        let mut students: Vec<StudentId> = self
            .users
            .read()
            .values()
            .filter(|u| u.class.as_deref() == Some(class))
            .map(|u| u.id.clone())
            .collect();
        students.sort();
        let lectures: Vec<LectureId> = self.catalog.read().lectures().map(|l| l.id.clone()).collect();
        let mut rows = Vec::new();
        for s in &students {
            for lec in &lectures {
                let key = (s.clone(), lec.clone());
                let row = match self.learners.get(&key).map(|l| l.clone()) {
                    Some(learner) => {
                        let l = learner.lock();
                        ProgressRow {
                            student: s.clone(),
                            lecture: lec.clone(),
                            answered: l.base.history.len(),
                            grade: compute_grade(&l.base.history, &l.settings.grade_policy).value(),
                            last_activity: l.last_activity,
                        }
                    }
                    None => ProgressRow {
                        student: s.clone(),
                        lecture: lec.clone(),
                        answered: 0,
                        grade: 0.0,
                        last_activity: None,
                    },
                };
                rows.push(row);
            }
        }
        Ok(rows)
    }

    /// Answers currently in students' histories, ordered by
    /// `(student, lecture, seq)`.
    pub fn export_rows(&self, caller: &Caller, lecture: Option<&LectureId>) -> Result<Vec<ExportRow>, SyncError> {
        if !self.is_admin(caller) {
            return Err(SyncError::Forbidden);
        }
        let mut keys: Vec<(StudentId, LectureId)> = self
            .learners
            .iter()
            .map(|e| e.key().clone())
            .filter(|(_, l)| lecture.is_none_or(|want| want == l))
            .collect();
        keys.sort();
        let mut rows = Vec::new();
        for key in keys {
            let Some(learner) = self.learners.get(&key).map(|l| l.clone()) else {
                continue;
            };
            let l = learner.lock();
            for a in l.answers.values().filter(|a| l.accepted.contains(&a.seq)) {
                rows.push(ExportRow {
                    student: key.0.clone(),
                    lecture: key.1.clone(),
                    seq: a.seq,
                    question: a.question.clone(),
                    chosen: a.chosen,
                    correct: a.correct,
                    timed_out: a.timed_out,
                    time_taken: a.time_taken,
                    client_ts: a.client_ts,
                    server_ts: a.server_ts,
                });
            }
        }
        Ok(rows)
    }

    /// Newline-delimited JSON form of [`Self::export_rows`].
    pub fn export_answers(&self, caller: &Caller, lecture: Option<&LectureId>) -> Result<String, SyncError> {
        let mut out = String::new();
        for row in self.export_rows(caller, lecture)? {
            out.push_str(&serde_json::to_string(&row).expect("export row serialises"));
            out.push('\n');
        }
        Ok(out)
    }

    /// Server-side grade and history length for one student and lecture.
    pub fn grade_of(&self, student: &StudentId, lecture: &LectureId) -> Option<(Grade, AnswerHistory)> {
        let learner = self.learners.get(&(student.clone(), lecture.clone()))?.clone();
        let l = learner.lock();
        Some((l.base.grade, l.base.history.clone()))
    }

    /// Stored answers for one student and lecture, in seq order, including
    /// ones excluded from the history.
    pub fn stored_answers(&self, student: &StudentId, lecture: &LectureId) -> Vec<StoredAnswer> {
        self.learners
            .get(&(student.clone(), lecture.clone()))
            .map(|l| l.clone())
            .map(|l| l.lock().answers.values().cloned().collect())
            .unwrap_or_default()
    }

    pub fn lecture_settings(&self, lecture: &LectureId) -> Option<LectureSettings> {
        self.settings.read().get(lecture).copied()
    }

    pub fn question(&self, id: &QuestionId) -> Option<Question> {
        self.catalog.read().question(id).cloned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::Choice;
    use crate::sync::MemoryJournal;

    fn questions(n: usize) -> Vec<Question> {
        (0..n)
            .map(|i| {
                Question::new(
                    format!("q{i}"),
                    vec![
                        Choice { text: "right".into(), correct: true },
                        Choice { text: "wrong".into(), correct: false },
                        Choice { text: "also wrong".into(), correct: false },
                    ],
                    "because",
                )
                .unwrap()
            })
            .collect()
    }

    fn settings() -> LectureSettings {
        LectureSettings {
            grade_policy: GradePolicy::default(),
            timeout_policy: TimeoutPolicy::default(),
        }
    }

    fn setup(n: usize) -> (SyncService, LectureId, StudentId, Caller) {
        let svc = SyncService::in_memory(Some("root")).with_rng_seed(9);
        let path: LecturePath = "c/t/l".parse().unwrap();
        svc.import_questions(&path, questions(n), settings()).unwrap();
        let admin = svc.authenticate("root").unwrap();
        let token = svc
            .create_user(&admin, NewUser { id: "ann".into(), class: Some("k1".into()), tutor_of: vec![], admin: false })
            .unwrap();
        let caller = svc.authenticate(&token).unwrap();
        (svc, path.lecture_id(), "ann".into(), caller)
    }

    fn record(token: &AllocationToken, seq: u64, chosen: usize) -> AnswerRecord {
        AnswerRecord {
            token: token.clone(),
            client_seq: seq,
            chosen_index: Some(chosen),
            time_taken: 5.0,
            timed_out: false,
            client_timestamp: 1000 + seq as i64,
        }
    }

    #[test]
    fn allocation_is_idempotent() {
        let (svc, lec, ann, _) = setup(3);
        let a = svc.get_allocation(&ann, &lec).unwrap();
        let b = svc.get_allocation(&ann, &lec).unwrap();
        assert_eq!(a.questions.len(), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_lecture() {
        let (svc, _, ann, _) = setup(3);
        assert!(matches!(
            svc.get_allocation(&ann, &"x.y.z".into()),
            Err(SyncError::UnknownLecture(_))
        ));
    }

    #[test]
    fn correctness_recomputed_server_side() {
        let (svc, lec, ann, caller) = setup(3);
        let alloc = svc.get_allocation(&ann, &lec).unwrap();
        let t = &alloc.questions[0].token;
        let ack = svc
            .ingest_batch(
                &caller,
                UploadBatch {
                    student_id: ann.clone(),
                    lecture_id: lec.clone(),
                    records: vec![record(t, 1, 0), record(t, 2, 2)],
                },
            )
            .unwrap();
        assert_eq!(ack.answered, 2);
        assert_eq!(ack.grade, 5.0);
        let stored = svc.stored_answers(&ann, &lec);
        assert!(stored[0].correct && !stored[1].correct);
    }

    #[test]
    fn rejects_bad_records() {
        let (svc, lec, ann, caller) = setup(3);
        let alloc = svc.get_allocation(&ann, &lec).unwrap();
        let t = &alloc.questions[0].token;
        let slow = AnswerRecord { time_taken: 500.0, ..record(t, 3, 0) };
        let timed_out = AnswerRecord { timed_out: true, chosen_index: None, time_taken: 180.0, ..record(t, 4, 0) };
        let ack = svc
            .ingest_batch(
                &caller,
                UploadBatch {
                    student_id: ann.clone(),
                    lecture_id: lec.clone(),
                    records: vec![
                        record(t, 0, 0),
                        record(t, 1, 7),
                        record(&"nope".into(), 2, 0),
                        slow,
                        timed_out,
                        record(t, 5, 0),
                        record(t, 5, 0),
                    ],
                },
            )
            .unwrap();
        let st: Vec<RecordStatus> = ack.statuses.iter().map(|s| s.status.clone()).collect();
        assert_eq!(
            st,
            vec![
                RecordStatus::rejected("invalid_seq"),
                RecordStatus::rejected("invalid_choice"),
                RecordStatus::rejected("unknown_token"),
                RecordStatus::rejected("timeout_violation"),
                RecordStatus::Accepted,
                RecordStatus::Accepted,
                RecordStatus::Duplicate,
            ]
        );
        assert_eq!(ack.answered, 2);
    }

    #[test]
    fn forbidden_for_other_student() {
        let (svc, lec, _, _) = setup(3);
        let err = svc
            .ingest_batch(
                &Caller::User("bob".into()),
                UploadBatch { student_id: "ann".into(), lecture_id: lec, records: vec![] },
            )
            .unwrap_err();
        assert!(matches!(err, SyncError::Forbidden));
    }

    #[test]
    fn replay_rebuilds_identical_state() {
        let journal = MemoryJournal::new();
        let svc = SyncService::open(Box::new(journal.clone()), vec![], Some("root")).unwrap();
        let path: LecturePath = "c/t/l".parse().unwrap();
        svc.import_questions(&path, questions(5), settings()).unwrap();
        let admin = Caller::Admin;
        let token = svc
            .create_user(&admin, NewUser { id: "ann".into(), class: None, tutor_of: vec![], admin: false })
            .unwrap();
        let caller = svc.authenticate(&token).unwrap();
        let lec = path.lecture_id();
        let alloc = svc.get_allocation(&"ann".into(), &lec).unwrap();
        let recs = (1..=12)
            .map(|s| record(&alloc.questions[s as usize % 5].token, s, (s % 2) as usize))
            .collect();
        svc.ingest_batch(&caller, UploadBatch { student_id: "ann".into(), lecture_id: lec.clone(), records: recs })
            .unwrap();

        let again = SyncService::open(Box::new(MemoryJournal::new()), journal.entries(), Some("root")).unwrap();
        assert_eq!(
            again.export_answers(&admin, None).unwrap(),
            svc.export_answers(&admin, None).unwrap()
        );
        assert_eq!(again.get_allocation(&"ann".into(), &lec).unwrap(), alloc_with_grade(&svc, &lec));
        assert_eq!(again.authenticate(&token), Some(caller));
        let q = &alloc.questions[0];
        let qid = again.stored_answers(&"ann".into(), &lec)[4].question.clone();
        assert_eq!(again.difficulty_stats(&qid), svc.difficulty_stats(&qid));
        assert!(!q.stem.is_empty());
    }

    fn alloc_with_grade(svc: &SyncService, lec: &LectureId) -> AllocationPayload {
        svc.get_allocation(&"ann".into(), lec).unwrap()
    }

    #[test]
    fn derive_matches_incremental_state() {
        let (svc, lec, ann, caller) = setup(4);
        let alloc = svc.get_allocation(&ann, &lec).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        let mut seq = 0;
        for _ in 0..30 {
            let recs: Vec<AnswerRecord> = (0..rng.random_range(1..6))
                .map(|_| {
                    seq += 1;
                    AnswerRecord {
                        time_taken: rng.random_range(0.0..40.0),
                        timed_out: rng.random_bool(0.1),
                        ..record(&alloc.questions[rng.random_range(0..4)].token, seq, rng.random_range(0..3))
                    }
                })
                .collect();
            svc.ingest_batch(&caller, UploadBatch { student_id: ann.clone(), lecture_id: lec.clone(), records: recs })
                .unwrap();
            let stored = svc.stored_answers(&ann, &lec);
            let derived = derive_history(&stored, &settings());
            let (grade, history) = svc.grade_of(&ann, &lec).unwrap();
            assert_eq!(history, derived.history);
            assert!((grade.value() - derived.grade.value()).abs() < 1e-12);
            assert_eq!(grade, compute_grade(&history, &GradePolicy::default()));
        }
    }

    #[test]
    fn progress_and_export_permissions() {
        let (svc, lec, ann, caller) = setup(3);
        let admin = Caller::Admin;
        let tutor_token = svc
            .create_user(&admin, NewUser { id: "tim".into(), class: None, tutor_of: vec!["k1".into()], admin: false })
            .unwrap();
        let tutor = svc.authenticate(&tutor_token).unwrap();

        let rows = svc.class_progress(&tutor, "k1").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].answered, rows[0].grade), (0, 0.0));
        assert!(matches!(svc.class_progress(&caller, "k1"), Err(SyncError::Forbidden)));
        assert!(matches!(svc.class_progress(&tutor, "k2"), Err(SyncError::Forbidden)));
        assert!(matches!(svc.export_answers(&tutor, None), Err(SyncError::Forbidden)));
        assert!(matches!(
            svc.create_user(&caller, NewUser { id: "x".into(), class: None, tutor_of: vec![], admin: false }),
            Err(SyncError::Forbidden)
        ));

        let alloc = svc.get_allocation(&ann, &lec).unwrap();
        let t = &alloc.questions[0].token;
        let recs = (1..=8).map(|s| record(t, s, 0)).collect();
        svc.ingest_batch(&caller, UploadBatch { student_id: ann.clone(), lecture_id: lec.clone(), records: recs })
            .unwrap();
        let rows = svc.class_progress(&admin, "k1").unwrap();
        assert_eq!((rows[0].answered, rows[0].grade), (8, 10.0));
        assert!(rows[0].last_activity.is_some());
        assert_eq!(svc.export_answers(&admin, Some(&lec)).unwrap().lines().count(), 8);
        assert_eq!(svc.export_answers(&admin, Some(&"a.b.c".into())).unwrap(), "");
    }

    #[test]
    fn next_question_follows_grade() {
        let (svc, lec, ann, _) = setup(3);
        svc.get_allocation(&ann, &lec).unwrap();
        let q = svc.next_question(&ann, &lec, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        assert_eq!(q.token.as_str().len(), 26);
    }
}
