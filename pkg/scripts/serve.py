import os
import sys

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SRC_DIR = os.path.join(BASE_DIR, "src")
if SRC_DIR not in sys.path:
    sys.path.insert(0, SRC_DIR)

import uvicorn

from bellcheck.config.settings import settings

print(f"Starting server on http://{settings.api_host}:{settings.api_port} ...")
uvicorn.run("bellcheck.api.server:app", host=settings.api_host, port=settings.api_port, reload=False,
            log_level=settings.log_level.lower())
