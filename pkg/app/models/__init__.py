# Pydantic models and schemas


