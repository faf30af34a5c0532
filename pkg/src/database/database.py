import sqlite3
import os
import logging
import json
from typing import Dict, List, Optional, Any
from contextlib import contextmanager

from config.config import Config

class DatabaseManager:
    """Regression corpus: digests of structured reports and shrunk counterexamples"""

    def __init__(self, db_path: Optional[str] = None):
        self.db_path = db_path or Config.CORPUS_DB
        self.logger = logging.getLogger(__name__)

        directory = os.path.dirname(self.db_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self.init_database()

    def init_database(self):
        """Create the corpus tables if they are missing"""
        try:
            current_dir = os.path.dirname(os.path.abspath(__file__))
            schema_path = os.path.join(current_dir, 'schema.sql')

            with open(schema_path, 'r') as f:
                schema = f.read()

            with self.get_connection() as conn:
                conn.executescript(schema)
                conn.commit()

            self.logger.debug(f"Corpus schema ready at {self.db_path}")
        except Exception as e:
            self.logger.error(f"Failed to initialize corpus database: {e}")
            raise

    @contextmanager
    def get_connection(self):
        """Get database connection with context manager"""
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        try:
            yield conn
        finally:
            conn.close()

    def save_run(self, kind: str, name: str, seed: int, digest: str, success: bool,
                 count: Optional[int] = None) -> Optional[int]:
        try:
            with self.get_connection() as conn:
                cursor = conn.execute("""
                    INSERT INTO runs (kind, name, seed, count, digest, success, tool_version)
                    VALUES (?, ?, ?, ?, ?, ?, ?)
                """, (kind, name, seed, count, digest, success, Config.TOOL_VERSION))
                conn.commit()
                return cursor.lastrowid
        except Exception as e:
            self.logger.error(f"Failed to save run {name}: {e}")
            return None

    def save_counterexample(self, run_id: Optional[int], family: str, seed: int, index: int,
                            instance: Dict[str, Any], axiom: Optional[str], shrink_steps: int) -> bool:
        try:
            with self.get_connection() as conn:
                conn.execute("""
                    INSERT OR REPLACE INTO counterexamples
                        (run_id, family, seed, instance_index, instance_json, axiom, shrink_steps)
                    VALUES (?, ?, ?, ?, ?, ?, ?)
                """, (run_id, family, seed, index, json.dumps(instance, sort_keys=True), axiom, shrink_steps))
                conn.commit()
                return True
        except Exception as e:
            self.logger.error(f"Failed to save counterexample for {family}: {e}")
            return False

    def get_runs(self, name: str, seed: Optional[int] = None) -> List[Dict]:
        with self.get_connection() as conn:
            if seed is None:
                cursor = conn.execute("SELECT * FROM runs WHERE name = ? ORDER BY id", (name,))
            else:
                cursor = conn.execute("SELECT * FROM runs WHERE name = ? AND seed = ? ORDER BY id", (name, seed))
            return [dict(row) for row in cursor.fetchall()]

    def previous_digest(self, name: str, seed: int) -> Optional[str]:
        """Digest of the latest earlier run with this name and seed under the current tool version"""
        with self.get_connection() as conn:
            cursor = conn.execute("""
                SELECT digest FROM runs
                WHERE name = ? AND seed = ? AND tool_version = ?
                ORDER BY id DESC
                LIMIT 1
            """, (name, seed, Config.TOOL_VERSION))
            result = cursor.fetchone()
            return result['digest'] if result else None

    def get_counterexamples(self, family: str) -> List[Dict]:
        with self.get_connection() as conn:
            cursor = conn.execute("""
                SELECT * FROM counterexamples WHERE family = ? ORDER BY seed, instance_index
            """, (family,))
            rows = [dict(row) for row in cursor.fetchall()]
        for row in rows:
            row['instance'] = json.loads(row.pop('instance_json'))
        return rows
