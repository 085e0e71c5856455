from fastapi import FastAPI
from app.core.config import configure_logging, settings
from app.core.errors import ExpSieveError
from app.api.routes import router
from app.services.tables import published_tables

configure_logging()

# --- APPLICATION SETUP ---
app = FastAPI(
    title=settings.API_TITLE,
    description=settings.API_DESCRIPTION,
    version=settings.API_VERSION
)

# Include the API routes
app.include_router(router)

# --- HEALTH CHECK ---
@app.get("/", tags=["Health"])
def health_check():
    """
    Basic health check endpoint.
    """
    return {"status": "healthy", "service": "expsieve"}

@app.get("/health", tags=["Health"])
def health_check_detailed():
    """
    Detailed health check including the published table data.
    """
    try:
        tables = published_tables()
        table_status = f"{len(tables.table1)} + {len(tables.table2)} rows"
    except ExpSieveError:
        table_status = "missing"
    return {
        "status": "healthy",
        "service": "expsieve",
        "precision_bits": settings.WORKING_PRECISION,
        "tables": table_status,
    }

if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="127.0.0.1", port=8000)
