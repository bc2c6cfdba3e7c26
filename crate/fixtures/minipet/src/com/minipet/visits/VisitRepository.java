package com.minipet.visits;

import java.util.List;

import com.minipet.pets.Pet;

public interface VisitRepository {
    List<Visit> findByPet(Pet pet);

    void save(Visit visit);
}
