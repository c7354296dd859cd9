use std::collections::HashMap;

/// Maps emoji code points to words so bios can be compared as token sets.
#[derive(Clone, Debug)]
pub struct EmojiMap {
    words: HashMap<char, String>,
}

const DEFAULT_EMOJI: &[(char, &str)] = &[
    ('❤', "heart"),
    ('♥', "heart"),
    ('💙', "heart"),
    ('💜', "heart"),
    ('💛', "heart"),
    ('💚', "heart"),
    ('🖤', "heart"),
    ('😍', "love"),
    ('😘', "kiss"),
    ('😂', "laugh"),
    ('🤣', "laugh"),
    ('😊', "smile"),
    ('🙂', "smile"),
    ('😎', "cool"),
    ('🔥', "fire"),
    ('⭐', "star"),
    ('🌟', "star"),
    ('✨', "sparkles"),
    ('⚽', "soccer"),
    ('🏀', "basketball"),
    ('🏈', "football"),
    ('🎾', "tennis"),
    ('🏆', "trophy"),
    ('🎵', "music"),
    ('🎶', "music"),
    ('🎤', "microphone"),
    ('🎬', "film"),
    ('📺', "tv"),
    ('📷', "camera"),
    ('📸', "camera"),
    ('📰', "news"),
    ('🌍', "world"),
    ('🌎', "world"),
    ('🌏', "world"),
    ('🇺', "flag"),
    ('🙏', "pray"),
    ('👑', "crown"),
    ('💯', "hundred"),
    ('💰', "money"),
    ('💵', "money"),
    ('🚀', "rocket"),
    ('✅', "check"),
    ('✔', "check"),
    ('☑', "check"),
    ('👉', "point"),
    ('👇', "point"),
    ('🔗', "link"),
    ('📩', "mail"),
    ('📧', "mail"),
    ('🐐', "goat"),
    ('🦁', "lion"),
    ('🏳', "flag"),
];

impl EmojiMap {
    pub fn new() -> Self {
        Self {
            words: HashMap::new(),
        }
    }

    pub fn insert(&mut self, emoji: char, word: impl Into<String>) {
        self.words.insert(emoji, word.into());
    }

    pub fn word_for(&self, c: char) -> Option<&str> {
        self.words.get(&c).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for EmojiMap {
    fn default() -> Self {
        let mut map = Self::new();
        for &(c, w) in DEFAULT_EMOJI {
            map.insert(c, w);
        }
        map
    }
}
