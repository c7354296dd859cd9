use serde::{Deserialize, Serialize};

use super::{DataSource, FriendshipOracle, LookupResult, TweetPage};
use crate::error::{Error, Result};

/// Connection settings for a networked backend.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LiveBackendConfig {
    pub base_url: String,
    /// Name of the environment variable holding the bearer token.
    pub token_env: String,
}

/// Placeholder for a networked backend. It satisfies the [`DataSource`]
/// contract but every call reports a backend error; wrap a real client in a
/// type implementing the same traits to go online.
#[derive(Clone, Debug)]
pub struct LiveBackend {
    config: LiveBackendConfig,
}

impl LiveBackend {
    pub fn new(config: LiveBackendConfig) -> Self {
        LiveBackend { config }
    }

    pub fn config(&self) -> &LiveBackendConfig {
        &self.config
    }

    fn unavailable<T>(&self) -> Result<T> {
        Err(Error::Backend(format!(
            "no live client is compiled in (base url {:?})",
            self.config.base_url
        )))
    }
}

impl FriendshipOracle for LiveBackend {
    fn follows(&self, _: &str, _: &str) -> Result<bool> {
        self.unavailable()
    }
}

impl DataSource for LiveBackend {
    fn lookup_batch(&self, _: &[String]) -> Result<LookupResult> {
        self.unavailable()
    }

    fn fetch_recent_tweets(&self, _: &str, _: usize) -> Result<TweetPage> {
        self.unavailable()
    }

    fn fetch_mentions(&self, _: &str, _: usize) -> Result<TweetPage> {
        self.unavailable()
    }

    fn search_users(&self, _: &str, _: usize) -> Result<Vec<String>> {
        self.unavailable()
    }
}
